#include "scaleseg/backbone.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace scaleseg {

// tanh(x) = 2*sigma(2x) - 1. Unit slope at the origin keeps signals alive
// through the encoder-decoder cascade.
Tensor activation(const Tensor& x) {
    Tensor two = Tensor::full(x.shape(), 2.0);
    Tensor one = Tensor::full(x.shape(), 1.0);
    return sub(mul(sigmoid(mul(x, two)), two), one);
}

namespace {

// Decoder stage i consumes the upsampled features concatenated with the
// skip tensor at that resolution (encoder features, or the raw input for
// the last stage).
int decoder_in_channels(const BackboneConfig& cfg, int i) {
    return cfg.width + (i == cfg.depth - 1 ? cfg.input_channels : cfg.width);
}

}  // namespace

ParamSet init_backbone(std::uint64_t seed, const BackboneConfig& cfg) {
    if (cfg.width < 1 || cfg.depth < 1 || cfg.input_channels < 1 || cfg.classes < 2)
        throw std::invalid_argument("init_backbone: invalid config");
    ParamSet params("init");
    InitRng rng(seed);
    for (int i = 0; i < cfg.depth; ++i) {
        const int in_ch = i == 0 ? cfg.input_channels : cfg.width;
        params.add("enc" + std::to_string(i),
                   uniform_kernel(rng, {cfg.width, in_ch, 3, 3}, in_ch * 9));
    }
    for (int i = 0; i < cfg.depth; ++i) {
        const int in_ch = decoder_in_channels(cfg, i);
        params.add("dec" + std::to_string(i),
                   uniform_kernel(rng, {cfg.width, in_ch, 3, 3}, in_ch * 9));
    }
    params.add("head", uniform_kernel(rng, {cfg.classes, cfg.width, 1, 1}, cfg.width));
    return params;
}

BackboneConfig backbone_config_from_params(const ParamSet& params) {
    BackboneConfig cfg;
    if (!params.has("enc0") || !params.has("head"))
        throw std::invalid_argument("checkpoint does not contain a backbone (enc0/head missing)");
    const Shape& e0 = params.at("enc0").shape();
    const Shape& head = params.at("head").shape();
    cfg.width = e0[0];
    cfg.input_channels = e0[1];
    cfg.classes = head[0];
    cfg.depth = 0;
    while (params.has("enc" + std::to_string(cfg.depth))) ++cfg.depth;
    return cfg;
}

std::size_t backbone_param_count(const BackboneConfig& cfg) {
    std::size_t n = static_cast<std::size_t>(cfg.width) * cfg.input_channels * 9;
    n += static_cast<std::size_t>(cfg.depth - 1) * cfg.width * cfg.width * 9;  // enc1..enc{d-1}
    for (int i = 0; i < cfg.depth; ++i)
        n += static_cast<std::size_t>(cfg.width) * decoder_in_channels(cfg, i) * 9;
    n += static_cast<std::size_t>(cfg.classes) * cfg.width;  // head
    return n;
}

BackboneOutput backbone_forward(const ParamSet& params, const Tensor& frame,
                                const Tensor& guidance, const BackboneConfig& cfg) {
    if (frame.shape().size() != 3 || guidance.shape().size() != 3)
        throw std::invalid_argument("backbone_forward: frame and guidance must be rank-3");
    if (frame.shape()[0] + guidance.shape()[0] != cfg.input_channels)
        throw std::invalid_argument("backbone_forward: expected " +
                                    std::to_string(cfg.input_channels) +
                                    " total input channels, got " +
                                    std::to_string(frame.shape()[0] + guidance.shape()[0]));
    if (frame.shape()[1] != guidance.shape()[1] || frame.shape()[2] != guidance.shape()[2])
        throw std::invalid_argument("backbone_forward: frame extent " + shape_str(frame.shape()) +
                                    " does not match guidance extent " +
                                    shape_str(guidance.shape()));

    Tensor x = concat_channels(frame, guidance);
    std::vector<std::pair<int, int>> stage_sizes;
    for (int i = 0; i < cfg.depth; ++i) {
        stage_sizes.emplace_back(x.shape()[1], x.shape()[2]);
        x = activation(conv2d(x, params.at("enc" + std::to_string(i)), 2, 1));
    }
    for (int i = 0; i < cfg.depth; ++i) {
        const auto [th, tw] = stage_sizes[cfg.depth - 1 - i];
        x = activation(conv2d(bilinear_resize(x, th, tw),
                              params.at("dec" + std::to_string(i)), 1, 1));
    }
    Tensor logits = conv2d(x, params.at("head"), 1, 0);
    return {x, clamp_probs(softmax_channels(logits))};
}

}  // namespace scaleseg
