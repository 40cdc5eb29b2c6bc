#pragma once

#include "scaleseg/image.hpp"
#include "scaleseg/tensor.hpp"

namespace scaleseg {

// k x k bilateral kernel in the previous frame: spatial Gaussian times
// intensity Gaussian, normalized per pixel over the in-bounds window so the
// weights sum to one.
struct BilateralConfig {
    int k = 5;
    double sigma_p = 2.0;  // spatial std, pixels
    double sigma_i = 0.1;  // intensity std, normalized units
};

void validate_bilateral(const BilateralConfig& cfg);

// Per-pixel cross-entropy -log pred(p, target(p)) with clamped
// probabilities. (1,H,W), nonnegative, differentiable w.r.t. pred.
Tensor seg_loss(const Tensor& pred, const Mask& target);

// sum_p e^{beta * V(p)} * L(p). Gradient flows through both the loss map
// and the variance map; beta = 0 reduces to the plain summed loss exactly.
Tensor variance_weighted_loss(const Tensor& lossmap, const Tensor& variance, double beta);

// Self-training term: sum_p e^{-V(p)} * CE(pred, pseudo_label)(p). The
// variance map only guides the weighting (stop-gradient inside).
Tensor intra_loss(const Tensor& pred, const Mask& pseudo_label, const Tensor& variance);

// Per-pixel argmax of a prediction, used as the pseudo-label source.
Mask pseudo_labels(const Tensor& pred);

// exp(-||p-q||^2 / 2 sigma_p^2 - ||I_t(p)-I_prev(q)||^2 / 2 sigma_i^2),
// before normalization.
double bilateral_unnormalized(int py, int px, int qy, int qx, const Image& frame_t,
                              const Image& frame_prev, const BilateralConfig& cfg);

// Normalized weight; q must lie in the in-bounds k x k window around p.
double bilateral_weight(int py, int px, int qy, int qx, const Image& frame_t,
                        const Image& frame_prev, const BilateralConfig& cfg);

// sum_p sum_{q in K_p} F(p,q) |Y_t(p) - Y_prev(q)| over the foreground
// channel. Y_prev is treated as a constant: no gradient flows into it.
Tensor inter_loss(const Tensor& y_t, const Tensor& y_prev, const Image& frame_t,
                  const Image& frame_prev, const BilateralConfig& cfg);

// L_online = L_intra + L_inter.
Tensor online_loss(const Tensor& intra, const Tensor& inter);

}  // namespace scaleseg
