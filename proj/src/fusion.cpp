#include "scaleseg/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "scaleseg/backbone.hpp"
#include "scaleseg/errors.hpp"
#include "scaleseg/sequence_io.hpp"

namespace scaleseg {

void validate_scales(const ScaleConfig& cfg) {
    if (!(cfg.s1 > 0.0) || !(cfg.s1 < cfg.s2))
        throw std::invalid_argument("scale config requires 0 < s1 < s2");
}

int scaled_extent(int extent, double scale) {
    return std::max(1, static_cast<int>(std::llround(extent * scale)));
}

void init_attention(ParamSet& params, std::uint64_t seed, const AttentionConfig& cfg) {
    if (cfg.in_channels < 1 || cfg.width < 1)
        throw std::invalid_argument("init_attention: invalid config");
    InitRng rng(seed);
    params.add("attn0", uniform_kernel(rng, {cfg.width, cfg.in_channels, 3, 3}, cfg.in_channels * 9));
    params.add("attn1", uniform_kernel(rng, {cfg.width, cfg.width, 3, 3}, cfg.width * 9));
    params.add("attn2", uniform_kernel(rng, {1, cfg.width, 1, 1}, cfg.width));
}

AttentionConfig attention_config_from_params(const ParamSet& params) {
    if (!params.has("attn0"))
        throw std::invalid_argument("checkpoint does not contain attention parameters");
    AttentionConfig cfg;
    cfg.width = params.at("attn0").shape()[0];
    cfg.in_channels = params.at("attn0").shape()[1];
    return cfg;
}

std::size_t attention_param_count(const AttentionConfig& cfg) {
    return static_cast<std::size_t>(cfg.width) * cfg.in_channels * 9 +
           static_cast<std::size_t>(cfg.width) * cfg.width * 9 + cfg.width;
}

Tensor attention_forward(const ParamSet& params, const Tensor& feat_s1, const Tensor& feat_s2,
                         const AttentionConfig& cfg) {
    if (feat_s1.shape().size() != 3 || feat_s2.shape().size() != 3)
        throw std::invalid_argument("attention_forward: features must be rank-3");
    Tensor f2 = bilinear_resize(feat_s2, feat_s1.shape()[1], feat_s1.shape()[2]);
    Tensor x = concat_channels(feat_s1, f2);
    if (x.shape()[0] != cfg.in_channels)
        throw std::invalid_argument("attention_forward: concatenated features have " +
                                    std::to_string(x.shape()[0]) + " channels, head expects " +
                                    std::to_string(cfg.in_channels));
    x = activation(conv2d(x, params.at("attn0"), 1, 1));
    x = activation(conv2d(x, params.at("attn1"), 1, 1));
    return sigmoid(conv2d(x, params.at("attn2"), 1, 0));
}

namespace {

void check_fuse_shapes(const Tensor& attention, const Tensor& m_s1, const Tensor& m_s2) {
    if (attention.shape().size() != 3 || m_s1.shape().size() != 3 || m_s2.shape().size() != 3)
        throw std::invalid_argument("fuse: all inputs must be rank-3");
    if (attention.shape()[0] != 1)
        throw std::invalid_argument("fuse: attention map must have one channel, got " +
                                    shape_str(attention.shape()));
    if (m_s1.shape()[0] != m_s2.shape()[0])
        throw std::invalid_argument("fuse: class counts differ, " + shape_str(m_s1.shape()) +
                                    " vs " + shape_str(m_s2.shape()));
    if (attention.shape()[1] != m_s1.shape()[1] || attention.shape()[2] != m_s1.shape()[2])
        throw std::invalid_argument("fuse: scale mismatch, attention " +
                                    shape_str(attention.shape()) + " is not on the s1 grid " +
                                    shape_str(m_s1.shape()));
    if (m_s1.shape()[1] > m_s2.shape()[1] || m_s1.shape()[2] > m_s2.shape()[2])
        throw std::invalid_argument("fuse: scale mismatch, s1 prediction " +
                                    shape_str(m_s1.shape()) + " exceeds s2 grid " +
                                    shape_str(m_s2.shape()));
}

}  // namespace

Tensor fuse_raw(const Tensor& attention, const Tensor& m_s1, const Tensor& m_s2) {
    check_fuse_shapes(attention, m_s1, m_s2);
    const int h1 = m_s1.shape()[1], w1 = m_s1.shape()[2];
    const int h2 = m_s2.shape()[1], w2 = m_s2.shape()[2];
    Tensor a1 = bilinear_resize(attention, h1, w1);
    Tensor term1 = bilinear_resize(mul(a1, m_s1), h2, w2);
    Tensor a2 = bilinear_resize(attention, h2, w2);
    Tensor term2 = mul(sub(Tensor::full(a2.shape(), 1.0), a2), m_s2);
    return add(term1, term2);
}

Tensor fuse(const Tensor& attention, const Tensor& m_s1, const Tensor& m_s2) {
    return normalize_channels(fuse_raw(attention, m_s1, m_s2));
}

Tensor fuse_average(const Tensor& m_s1, const Tensor& m_s2) {
    if (m_s1.shape().size() != 3 || m_s2.shape().size() != 3 ||
        m_s1.shape()[0] != m_s2.shape()[0])
        throw std::invalid_argument("fuse_average: incompatible inputs " + shape_str(m_s1.shape()) +
                                    " and " + shape_str(m_s2.shape()));
    Tensor u = bilinear_resize(m_s1, m_s2.shape()[1], m_s2.shape()[2]);
    return mul(add(u, m_s2), Tensor::full(m_s2.shape(), 0.5));
}

Tensor variance_map(const Tensor& m_s1, const Tensor& m_s2) {
    if (m_s1.shape().size() != 3 || m_s2.shape().size() != 3 ||
        m_s1.shape()[0] != m_s2.shape()[0])
        throw std::invalid_argument("variance_map: incompatible inputs " + shape_str(m_s1.shape()) +
                                    " and " + shape_str(m_s2.shape()));
    Tensor u = clamp_probs(bilinear_resize(m_s1, m_s2.shape()[1], m_s2.shape()[2]));
    Tensor m = clamp_probs(m_s2);
    Tensor kl = channel_sum(mul(u, sub(log(u), log(m))));
    // KL of clamped distributions is nonnegative; the floor removes the
    // last-bit rounding negatives so the map honors its contract exactly.
    return clamp(kl, 0.0, std::numeric_limits<double>::infinity());
}

void export_heatmap(const Tensor& map, const std::filesystem::path& pgm_file) {
    if (map.shape().size() != 3 || map.shape()[0] != 1)
        throw std::invalid_argument("export_heatmap: expected a (1,H,W) map, got " +
                                    shape_str(map.shape()));
    const int h = map.shape()[1], w = map.shape()[2];
    auto v = map.values();
    double lo = v[0], hi = v[0];
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    std::vector<std::uint8_t> bytes(v.size(), 0);
    if (hi > lo)
        for (std::size_t i = 0; i < v.size(); ++i)
            bytes[i] = static_cast<std::uint8_t>(std::lround((v[i] - lo) / (hi - lo) * 255.0));
    write_pgm_bytes(pgm_file, h, w, bytes);

    std::filesystem::path sidecar = pgm_file;
    sidecar += ".txt";
    std::ofstream os(sidecar);
    if (!os) throw IoError("cannot write heatmap sidecar: " + sidecar.string());
    char buf[128];
    std::snprintf(buf, sizeof buf, "min %.17g\nmax %.17g\n", lo, hi);
    os << buf;
}

}  // namespace scaleseg
