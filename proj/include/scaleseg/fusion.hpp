#pragma once

#include <cstdint>
#include <filesystem>

#include "scaleseg/params.hpp"
#include "scaleseg/tensor.hpp"

namespace scaleseg {

// Working scales for the two backbone passes; s1 is the small input,
// s2 the reference. Extents are rounded half away from zero, minimum 1.
struct ScaleConfig {
    double s1 = 0.5;
    double s2 = 1.0;
};

void validate_scales(const ScaleConfig& cfg);
int scaled_extent(int extent, double scale);

// Three-convolution attention head: 3x3 -> 3x3 -> 1x1 + sigmoid over the
// channel-concatenation of the s1 features and the s2 features resized to
// the s1 grid. Output is a single-channel map in [0,1] at the s1 grid.
struct AttentionConfig {
    int in_channels = 16;  // 2 * backbone width
    int width = 16;
};

// Adds attn0..attn2 to an existing parameter set.
void init_attention(ParamSet& params, std::uint64_t seed, const AttentionConfig& cfg = {});
AttentionConfig attention_config_from_params(const ParamSet& params);
std::size_t attention_param_count(const AttentionConfig& cfg);

Tensor attention_forward(const ParamSet& params, const Tensor& feat_s1, const Tensor& feat_s2,
                         const AttentionConfig& cfg = {});

// U(U(A,s1) ∘ M_s1, s2) + (1 - U(A,s2)) ∘ M_s2, without renormalization.
// With A ≡ 1 this equals U(M_s1, s2) exactly; with A ≡ 0 it equals M_s2.
Tensor fuse_raw(const Tensor& attention, const Tensor& m_s1, const Tensor& m_s2);

// fuse_raw followed by per-pixel channel renormalization, so downstream
// losses always see a valid distribution.
Tensor fuse(const Tensor& attention, const Tensor& m_s1, const Tensor& m_s2);

// Plain multi-scale averaging baseline: (U(M_s1, s2) + M_s2) / 2.
Tensor fuse_average(const Tensor& m_s1, const Tensor& m_s2);

// Per-pixel scale-inconsistency map: class-wise KL divergence of the
// upsampled s1 distribution (left) against the s2 distribution (right),
// floored at zero. (1, H2, W2), nonnegative, zero iff the distributions
// match within the probability clamp.
Tensor variance_map(const Tensor& m_s1, const Tensor& m_s2);

// Min-max normalized 8-bit heatmap plus a plain-text sidecar recording the
// value range. A constant map degenerates to a uniform zero image.
void export_heatmap(const Tensor& map, const std::filesystem::path& pgm_file);

}  // namespace scaleseg
