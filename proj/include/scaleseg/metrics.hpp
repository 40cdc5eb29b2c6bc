#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "scaleseg/image.hpp"

namespace scaleseg {

// Region similarity |pred ∩ gt| / |pred ∪ gt| for one object label.
// Both masks empty counts as a perfect 1.0.
double jaccard(const Mask& pred, const Mask& gt, int object = 1);

// Contour accuracy. Boundary pixels are mask pixels 4-adjacent to a
// differing label (out-of-frame counts as background); a boundary pixel
// matches if any opposing boundary pixel lies within Chebyshev distance
// `tol`. F = 2PR/(P+R); 1 when both boundaries are empty, 0 when exactly
// one is.
double boundary_f(const Mask& pred, const Mask& gt, int object = 1, int tol = 1);

std::vector<std::pair<int, int>> boundary_pixels(const Mask& mask, int object);

// Mean of the first quartile minus mean of the last quartile, with frames
// split into four contiguous chunks (earlier chunks take the remainder).
// Absent for fewer than 4 frames.
std::optional<double> decay(const std::vector<double>& per_frame);

double jf_mean(double j_mean, double f_mean);

struct SequenceScore {
    std::vector<double> j;  // per frame, averaged over objects
    std::vector<double> f;
    double j_mean = 0.0;
    double f_mean = 0.0;
    double jf = 0.0;
    std::optional<double> j_decay;
    std::optional<double> f_decay;
};

// Scores frames that have ground truth; per-object J/F are averaged over
// objects per frame (multi-object convention).
SequenceScore score_sequence(const std::vector<Mask>& pred,
                             const std::vector<std::optional<Mask>>& gt, int object_count,
                             int boundary_tol = 1);

}  // namespace scaleseg
