#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "scaleseg/params.hpp"
#include "scaleseg/tensor.hpp"

namespace scaleseg::test {

struct GradCheck {
    bool ok = true;
    double worst_rel = 0.0;
    std::string detail;
};

// Central finite differences against reverse-mode gradients. `build` must
// reconstruct the scalar loss from the current leaf values; a check passes
// when the absolute difference is tiny or the relative error is within tol.
inline GradCheck check_gradients(const std::function<Tensor()>& build, std::vector<Tensor> leaves,
                                 double h = 1e-5, double rel_tol = 1e-4, double abs_tol = 1e-6) {
    GradCheck res;
    for (auto& l : leaves) l.clear_grad();
    Tensor loss = build();
    for (auto& l : leaves) l.ensure_grad();
    backward(loss);

    for (std::size_t li = 0; li < leaves.size(); ++li) {
        Tensor& leaf = leaves[li];
        std::vector<double> analytic(leaf.grad().begin(), leaf.grad().end());
        auto vals = leaf.values_mut();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double orig = vals[i];
            vals[i] = orig + h;
            const double fp = build().scalar();
            vals[i] = orig - h;
            const double fm = build().scalar();
            vals[i] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[i];
            const double diff = std::abs(a - numeric);
            const double rel = diff / std::max({std::abs(a), std::abs(numeric), 1e-12});
            res.worst_rel = std::max(res.worst_rel, diff <= abs_tol ? 0.0 : rel);
            if (diff > abs_tol && rel > rel_tol) {
                res.ok = false;
                std::ostringstream os;
                os << "leaf " << li << " slot " << i << ": analytic " << a << " vs numeric "
                   << numeric << " (rel " << rel << ")";
                res.detail = os.str();
                return res;
            }
        }
    }
    return res;
}

inline Tensor rand_tensor(InitRng& rng, const Shape& shape, double lo, double hi,
                          bool requires_grad = true) {
    std::vector<double> v(numel(shape));
    for (auto& x : v) x = rng.uniform_in(lo, hi);
    return Tensor::leaf(shape, std::move(v), requires_grad);
}

// Valid probability map (channels sum to one, entries clamped) as a leaf.
inline Tensor rand_probs(InitRng& rng, int c, int h, int w, bool requires_grad = false) {
    std::vector<double> v(static_cast<std::size_t>(c) * h * w);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::size_t p = 0; p < plane; ++p) {
        double s = 0.0;
        std::vector<double> e(c);
        for (int k = 0; k < c; ++k) {
            e[k] = std::exp(rng.uniform_in(-2.0, 2.0));
            s += e[k];
        }
        for (int k = 0; k < c; ++k)
            v[k * plane + p] = std::clamp(e[k] / s, scaleseg::kProbEps, 1.0 - scaleseg::kProbEps);
    }
    return Tensor::leaf({c, h, w}, std::move(v), requires_grad);
}

}  // namespace scaleseg::test
