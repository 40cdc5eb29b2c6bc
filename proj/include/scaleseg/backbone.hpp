#pragma once

#include <cstdint>

#include "scaleseg/params.hpp"
#include "scaleseg/tensor.hpp"

namespace scaleseg {

// Encoder-decoder segmentation backbone. `depth` stride-2 3x3 encoder convs
// are mirrored by bilinear-upsample + 3x3 conv decoder stages; a 1x1 head
// maps the last feature map to class logits. No biases; activations are
// tanh built from the sigmoid primitive (smooth everywhere, which keeps
// finite-difference gradient checks clean). Layer table and parameter
// counts are documented in the README.
struct BackboneConfig {
    int width = 8;           // feature channels throughout
    int depth = 4;           // number of stride-2 encoder stages
    int input_channels = 4;  // RGB frame + guidance mask
    int classes = 2;         // background / foreground
};

// Parameter names: enc0..enc{depth-1}, dec0..dec{depth-1}, head.
ParamSet init_backbone(std::uint64_t seed, const BackboneConfig& cfg = {});

// Recovers width/depth/channels from a loaded checkpoint's shapes.
BackboneConfig backbone_config_from_params(const ParamSet& params);

std::size_t backbone_param_count(const BackboneConfig& cfg);

struct BackboneOutput {
    Tensor features;  // (width, H, W), input of the fusion attention head
    Tensor probs;     // (classes, H, W), clamped softmax output
};

// frame (3,H,W) and guidance (1,H,W) must share extents; the caller resizes
// them to the working scale first. Pure function of (params, inputs).
BackboneOutput backbone_forward(const ParamSet& params, const Tensor& frame,
                                const Tensor& guidance, const BackboneConfig& cfg = {});

// Centered sigmoid 2*sigma(x) - 1, shared with the attention head.
Tensor activation(const Tensor& x);

}  // namespace scaleseg
