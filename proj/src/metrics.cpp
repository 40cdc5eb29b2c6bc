#include "scaleseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scaleseg {

namespace {

void check_extents(const Mask& a, const Mask& b, const char* what) {
    if (a.h != b.h || a.w != b.w)
        throw std::invalid_argument(std::string(what) + ": mask extents differ");
}

}  // namespace

double jaccard(const Mask& pred, const Mask& gt, int object) {
    check_extents(pred, gt, "jaccard");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        const bool p = pred.labels[i] == object;
        const bool g = gt.labels[i] == object;
        inter += p && g;
        uni += p || g;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::pair<int, int>> boundary_pixels(const Mask& mask, int object) {
    // Out-of-frame neighbors count as background, so an object cut by the
    // frame edge still has a contour there.
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < mask.h; ++y) {
        for (int x = 0; x < mask.w; ++x) {
            if (mask.at(y, x) != object) continue;
            const bool edge = y == 0 || mask.at(y - 1, x) != object || y + 1 == mask.h ||
                              mask.at(y + 1, x) != object || x == 0 ||
                              mask.at(y, x - 1) != object || x + 1 == mask.w ||
                              mask.at(y, x + 1) != object;
            if (edge) out.emplace_back(y, x);
        }
    }
    return out;
}

namespace {

std::size_t matched_count(const std::vector<std::pair<int, int>>& from,
                          const std::vector<std::pair<int, int>>& to, int tol) {
    std::size_t matched = 0;
    for (const auto& [fy, fx] : from) {
        for (const auto& [ty, tx] : to) {
            if (std::max(std::abs(fy - ty), std::abs(fx - tx)) <= tol) {
                ++matched;
                break;
            }
        }
    }
    return matched;
}

}  // namespace

double boundary_f(const Mask& pred, const Mask& gt, int object, int tol) {
    check_extents(pred, gt, "boundary_f");
    auto pb = boundary_pixels(pred, object);
    auto gb = boundary_pixels(gt, object);
    if (pb.empty() && gb.empty()) return 1.0;
    if (pb.empty() || gb.empty()) return 0.0;
    const double precision = static_cast<double>(matched_count(pb, gb, tol)) / pb.size();
    const double recall = static_cast<double>(matched_count(gb, pb, tol)) / gb.size();
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

std::optional<double> decay(const std::vector<double>& per_frame) {
    const std::size_t n = per_frame.size();
    if (n < 4) return std::nullopt;
    // Four contiguous chunks; the first n % 4 chunks take one extra frame.
    const std::size_t base = n / 4, extra = n % 4;
    std::size_t idx = 0;
    double means[4];
    for (std::size_t q = 0; q < 4; ++q) {
        const std::size_t len = base + (q < extra ? 1 : 0);
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += per_frame[idx++];
        means[q] = s / static_cast<double>(len);
    }
    return means[0] - means[3];
}

double jf_mean(double j_mean, double f_mean) { return (j_mean + f_mean) / 2.0; }

SequenceScore score_sequence(const std::vector<Mask>& pred,
                             const std::vector<std::optional<Mask>>& gt, int object_count,
                             int boundary_tol) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("score_sequence: prediction/ground-truth length mismatch");
    if (object_count < 1) throw std::invalid_argument("score_sequence: object_count must be >= 1");
    SequenceScore score;
    for (std::size_t t = 0; t < pred.size(); ++t) {
        if (!gt[t]) continue;
        double js = 0.0, fs = 0.0;
        for (int k = 1; k <= object_count; ++k) {
            js += jaccard(pred[t], *gt[t], k);
            fs += boundary_f(pred[t], *gt[t], k, boundary_tol);
        }
        score.j.push_back(js / object_count);
        score.f.push_back(fs / object_count);
    }
    if (score.j.empty()) throw std::invalid_argument("score_sequence: no scored frames");
    double js = 0.0, fs = 0.0;
    for (double v : score.j) js += v;
    for (double v : score.f) fs += v;
    score.j_mean = js / static_cast<double>(score.j.size());
    score.f_mean = fs / static_cast<double>(score.f.size());
    score.jf = jf_mean(score.j_mean, score.f_mean);
    score.j_decay = decay(score.j);
    score.f_decay = decay(score.f);
    return score;
}

}  // namespace scaleseg
