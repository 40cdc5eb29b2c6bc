#include "scaleseg/losses.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace scaleseg {

void validate_bilateral(const BilateralConfig& cfg) {
    if (cfg.k < 1 || cfg.k % 2 == 0)
        throw std::invalid_argument("bilateral config: kernel extent must be odd and >= 1");
    if (!(cfg.sigma_p > 0.0) || !(cfg.sigma_i > 0.0))
        throw std::invalid_argument("bilateral config: sigmas must be positive");
}

Tensor seg_loss(const Tensor& pred, const Mask& target) {
    if (pred.shape().size() != 3)
        throw std::invalid_argument("seg_loss: prediction must be rank-3");
    const int c = pred.shape()[0], h = pred.shape()[1], w = pred.shape()[2];
    if (h != target.h || w != target.w)
        throw std::invalid_argument("seg_loss: prediction extent " + shape_str(pred.shape()) +
                                    " does not match target " + std::to_string(target.h) + "x" +
                                    std::to_string(target.w));
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::vector<double> onehot(pred.size(), 0.0);
    for (std::size_t p = 0; p < plane; ++p) {
        const int label = target.labels[p];
        if (label < 0 || label >= c)
            throw std::invalid_argument("seg_loss: label " + std::to_string(label) +
                                        " out of range [0," + std::to_string(c - 1) + "]");
        onehot[static_cast<std::size_t>(label) * plane + p] = 1.0;
    }
    Tensor picked = channel_sum(mul(Tensor::leaf({c, h, w}, std::move(onehot), false),
                                    log(clamp_probs(pred))));
    return mul(picked, Tensor::full({1, h, w}, -1.0));
}

Tensor variance_weighted_loss(const Tensor& lossmap, const Tensor& variance, double beta) {
    if (lossmap.shape() != variance.shape())
        throw std::invalid_argument("variance_weighted_loss: extent mismatch, " +
                                    shape_str(lossmap.shape()) + " vs " +
                                    shape_str(variance.shape()));
    Tensor weights = exp(mul(variance, Tensor::full(variance.shape(), beta)));
    return sum(mul(weights, lossmap));
}

Tensor intra_loss(const Tensor& pred, const Mask& pseudo_label, const Tensor& variance) {
    Tensor lossmap = seg_loss(pred, pseudo_label);
    if (lossmap.shape() != variance.shape())
        throw std::invalid_argument("intra_loss: variance extent mismatch");
    Tensor v = stop_gradient(variance);
    Tensor weights = exp(mul(v, Tensor::full(v.shape(), -1.0)));
    return sum(mul(weights, lossmap));
}

Mask pseudo_labels(const Tensor& pred) { return argmax_mask(pred); }

namespace {

double intensity_dist2(const Image& a, int ay, int ax, const Image& b, int by, int bx) {
    double d2 = 0.0;
    for (int c = 0; c < a.channels; ++c) {
        const double d = a.at(c, ay, ax) - b.at(c, by, bx);
        d2 += d * d;
    }
    return d2;
}

void check_frames(const Image& frame_t, const Image& frame_prev) {
    if (frame_t.h != frame_prev.h || frame_t.w != frame_prev.w ||
        frame_t.channels != frame_prev.channels)
        throw std::invalid_argument("bilateral: frame extents differ");
    if (frame_t.h < 1 || frame_t.w < 1)
        throw std::invalid_argument("bilateral: degenerate frame");
}

}  // namespace

double bilateral_unnormalized(int py, int px, int qy, int qx, const Image& frame_t,
                              const Image& frame_prev, const BilateralConfig& cfg) {
    validate_bilateral(cfg);
    check_frames(frame_t, frame_prev);
    const double dy = py - qy, dx = px - qx;
    const double spatial = (dy * dy + dx * dx) / (2.0 * cfg.sigma_p * cfg.sigma_p);
    const double intensity =
        intensity_dist2(frame_t, py, px, frame_prev, qy, qx) / (2.0 * cfg.sigma_i * cfg.sigma_i);
    return std::exp(-spatial - intensity);
}

double bilateral_weight(int py, int px, int qy, int qx, const Image& frame_t,
                        const Image& frame_prev, const BilateralConfig& cfg) {
    validate_bilateral(cfg);
    check_frames(frame_t, frame_prev);
    const int r = cfg.k / 2;
    if (std::abs(qy - py) > r || std::abs(qx - px) > r || qy < 0 || qy >= frame_t.h || qx < 0 ||
        qx >= frame_t.w)
        throw std::invalid_argument("bilateral_weight: q outside the kernel window of p");
    double norm = 0.0;
    for (int yy = std::max(0, py - r); yy <= std::min(frame_t.h - 1, py + r); ++yy)
        for (int xx = std::max(0, px - r); xx <= std::min(frame_t.w - 1, px + r); ++xx)
            norm += bilateral_unnormalized(py, px, yy, xx, frame_t, frame_prev, cfg);
    return bilateral_unnormalized(py, px, qy, qx, frame_t, frame_prev, cfg) / norm;
}

Tensor inter_loss(const Tensor& y_t, const Tensor& y_prev, const Image& frame_t,
                  const Image& frame_prev, const BilateralConfig& cfg) {
    validate_bilateral(cfg);
    check_frames(frame_t, frame_prev);
    if (y_t.shape().size() != 3 || y_t.shape()[0] != 2)
        throw std::invalid_argument("inter_loss: expected a binary (2,H,W) prediction, got " +
                                    shape_str(y_t.shape()));
    if (y_t.shape() != y_prev.shape())
        throw std::invalid_argument("inter_loss: prediction extents differ across frames");
    const int h = y_t.shape()[1], w = y_t.shape()[2];
    if (h != frame_t.h || w != frame_t.w)
        throw std::invalid_argument("inter_loss: prediction extent does not match the frames");

    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const int r = cfg.k / 2;

    // Foreground channel of the previous prediction, copied: the previous
    // frame's output is an already-emitted constant.
    auto prev_fg = std::make_shared<std::vector<double>>(y_prev.values().begin() + plane,
                                                         y_prev.values().begin() + 2 * plane);
    // Normalized kernel table F(p, q), zero outside the frame.
    auto table = std::make_shared<std::vector<double>>(plane * cfg.k * cfg.k, 0.0);
    for (int py = 0; py < h; ++py) {
        for (int px = 0; px < w; ++px) {
            double norm = 0.0;
            const std::size_t base = (static_cast<std::size_t>(py) * w + px) *
                                     static_cast<std::size_t>(cfg.k) * cfg.k;
            for (int oy = -r; oy <= r; ++oy) {
                for (int ox = -r; ox <= r; ++ox) {
                    const int qy = py + oy, qx = px + ox;
                    if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
                    const double u =
                        bilateral_unnormalized(py, px, qy, qx, frame_t, frame_prev, cfg);
                    (*table)[base + static_cast<std::size_t>(oy + r) * cfg.k + (ox + r)] = u;
                    norm += u;
                }
            }
            for (int i = 0; i < cfg.k * cfg.k; ++i) (*table)[base + i] /= norm;
        }
    }

    auto yt = y_t.values();
    double total = 0.0;
    for (int py = 0; py < h; ++py) {
        for (int px = 0; px < w; ++px) {
            const std::size_t p = static_cast<std::size_t>(py) * w + px;
            const std::size_t base = p * static_cast<std::size_t>(cfg.k) * cfg.k;
            const double yp = yt[plane + p];
            for (int oy = -r; oy <= r; ++oy) {
                for (int ox = -r; ox <= r; ++ox) {
                    const int qy = py + oy, qx = px + ox;
                    if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
                    const double f =
                        (*table)[base + static_cast<std::size_t>(oy + r) * cfg.k + (ox + r)];
                    total += f * std::abs(yp - (*prev_fg)[static_cast<std::size_t>(qy) * w + qx]);
                }
            }
        }
    }

    const int k = cfg.k;
    return make_op({1}, {total}, {y_t},
                   [h, w, r, k, plane, table, prev_fg](TensorNode& self) {
                       TensorNode& p = *self.parents[0];
                       if (!p.requires_grad) return;
                       const double g = self.grad[0];
                       for (int py = 0; py < h; ++py) {
                           for (int px = 0; px < w; ++px) {
                               const std::size_t pi = static_cast<std::size_t>(py) * w + px;
                               const std::size_t base = pi * static_cast<std::size_t>(k) * k;
                               const double yp = p.values[plane + pi];
                               double acc = 0.0;
                               for (int oy = -r; oy <= r; ++oy) {
                                   for (int ox = -r; ox <= r; ++ox) {
                                       const int qy = py + oy, qx = px + ox;
                                       if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
                                       const double f =
                                           (*table)[base + static_cast<std::size_t>(oy + r) * k +
                                                    (ox + r)];
                                       const double d =
                                           yp - (*prev_fg)[static_cast<std::size_t>(qy) * w + qx];
                                       if (d > 0.0)
                                           acc += f;
                                       else if (d < 0.0)
                                           acc -= f;
                                   }
                               }
                               p.grad[plane + pi] += g * acc;
                           }
                       }
                   });
}

Tensor online_loss(const Tensor& intra, const Tensor& inter) {
    if (intra.size() != 1 || inter.size() != 1)
        throw std::invalid_argument("online_loss: inputs must be scalar losses");
    return add(intra, inter);
}

}  // namespace scaleseg
