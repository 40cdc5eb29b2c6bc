#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "scaleseg/metrics.hpp"
#include "scaleseg/params.hpp"

using namespace scaleseg;

namespace {

Mask random_mask(InitRng& rng, int h, int w, double fg_prob = 0.4) {
    Mask m = make_mask(h, w);
    for (auto& v : m.labels) v = rng.uniform() < fg_prob ? 1 : 0;
    return m;
}

Mask filled_rect(int h, int w, int y0, int x0, int y1, int x1) {
    Mask m = make_mask(h, w);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) m.at(y, x) = 1;
    return m;
}

Mask translate(const Mask& m, int dy, int dx) {
    Mask out = make_mask(m.h, m.w);
    for (int y = 0; y < m.h; ++y)
        for (int x = 0; x < m.w; ++x) {
            int ny = y + dy, nx = x + dx;
            if (ny >= 0 && ny < m.h && nx >= 0 && nx < m.w) out.at(ny, nx) = m.at(y, x);
        }
    return out;
}

// Exhaustive boundary matching oracle, independent of the implementation.
double boundary_f_oracle(const Mask& pred, const Mask& gt, int tol) {
    auto boundary = [](const Mask& m) {
        std::vector<std::pair<int, int>> px;
        for (int y = 0; y < m.h; ++y)
            for (int x = 0; x < m.w; ++x) {
                if (m.at(y, x) != 1) continue;
                bool edge = false;
                if (y == 0 || m.at(y - 1, x) != 1) edge = true;
                if (y == m.h - 1 || m.at(y + 1, x) != 1) edge = true;
                if (x == 0 || m.at(y, x - 1) != 1) edge = true;
                if (x == m.w - 1 || m.at(y, x + 1) != 1) edge = true;
                if (edge) px.emplace_back(y, x);
            }
        return px;
    };
    auto pb = boundary(pred), gb = boundary(gt);
    if (pb.empty() && gb.empty()) return 1.0;
    if (pb.empty() || gb.empty()) return 0.0;
    auto count = [&](const auto& from, const auto& to) {
        int n = 0;
        for (auto [fy, fx] : from) {
            bool hit = false;
            for (auto [ty, tx] : to)
                if (std::abs(fy - ty) <= tol && std::abs(fx - tx) <= tol) hit = true;
            n += hit;
        }
        return n;
    };
    double p = double(count(pb, gb)) / pb.size();
    double r = double(count(gb, pb)) / gb.size();
    return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
}

}  // namespace

TEST_CASE("jaccard basics") {
    Mask a = filled_rect(8, 8, 2, 2, 6, 6);
    CHECK(jaccard(a, a) == 1.0);
    Mask b = filled_rect(8, 8, 0, 0, 2, 2);
    CHECK(jaccard(a, b) == 0.0);
    Mask full = filled_rect(8, 8, 0, 0, 8, 8);
    Mask half = filled_rect(8, 8, 0, 0, 8, 4);
    CHECK(jaccard(half, full) == 0.5);
    Mask empty = make_mask(8, 8);
    CHECK(jaccard(empty, empty) == 1.0);
    CHECK(jaccard(empty, full) == 0.0);
}

TEST_CASE("boundary_f basics") {
    Mask a = filled_rect(10, 10, 2, 2, 7, 7);
    CHECK(boundary_f(a, a) == 1.0);
    Mask empty = make_mask(10, 10);
    CHECK(boundary_f(empty, a) == 0.0);
    CHECK(boundary_f(a, empty) == 0.0);
    CHECK(boundary_f(empty, empty) == 1.0);
}

TEST_CASE("shifted square within tolerance scores a perfect boundary match") {
    Mask gt = filled_rect(12, 12, 3, 3, 8, 8);
    Mask pred = filled_rect(12, 12, 3, 4, 8, 9);  // shifted one pixel right
    CHECK(boundary_f(pred, gt, 1, 1) == 1.0);
    CHECK(boundary_f(pred, gt, 1, 1) == boundary_f_oracle(pred, gt, 1));
    CHECK(boundary_f(pred, gt, 1, 0) < 1.0);
}

TEST_CASE("boundary_f matches the exhaustive oracle on random masks") {
    InitRng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        Mask p = random_mask(rng, 9, 9);
        Mask g = random_mask(rng, 9, 9);
        for (int tol : {0, 1, 2})
            CHECK(boundary_f(p, g, 1, tol) == doctest::Approx(boundary_f_oracle(p, g, tol)));
    }
}

TEST_CASE("jaccard and boundary_f are symmetric under swapping") {
    InitRng rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        Mask p = random_mask(rng, 8, 8);
        Mask g = random_mask(rng, 8, 8);
        CHECK(jaccard(p, g) == jaccard(g, p));
        CHECK(boundary_f(p, g) == doctest::Approx(boundary_f(g, p)));
    }
}

TEST_CASE("metrics are invariant under joint translation") {
    InitRng rng(41);
    Mask p = filled_rect(16, 16, 3, 3, 8, 9);
    Mask g = filled_rect(16, 16, 4, 3, 9, 8);
    const double j0 = jaccard(p, g);
    const double f0 = boundary_f(p, g);
    for (auto [dy, dx] : {std::pair{2, 3}, std::pair{4, 1}, std::pair{1, 5}}) {
        CHECK(jaccard(translate(p, dy, dx), translate(g, dy, dx)) == j0);
        CHECK(boundary_f(translate(p, dy, dx), translate(g, dy, dx)) == doctest::Approx(f0));
    }
}

TEST_CASE("decay trivial and derived cases") {
    CHECK(decay({0.7, 0.7, 0.7, 0.7}) == 0.0);
    CHECK(decay({1.0, 1.0, 0.0, 0.0}) == 1.0);
    CHECK_FALSE(decay({1.0, 0.5, 0.0}).has_value());

    // Linear 1.0 -> 0.0 over 8 frames, against a direct quartile computation.
    std::vector<double> lin(8);
    for (int i = 0; i < 8; ++i) lin[i] = 1.0 - i / 7.0;
    const double q1 = (lin[0] + lin[1]) / 2.0;
    const double q4 = (lin[6] + lin[7]) / 2.0;
    CHECK(*decay(lin) == doctest::Approx(q1 - q4).epsilon(1e-15));

    // Uneven split: 6 frames -> chunks of 2,2,1,1.
    std::vector<double> six = {1.0, 0.8, 0.6, 0.5, 0.4, 0.1};
    CHECK(*decay(six) == doctest::Approx((1.0 + 0.8) / 2.0 - 0.1).epsilon(1e-15));
}

TEST_CASE("jf_mean including the published reference value") {
    CHECK(jf_mean(1.0, 1.0) == 1.0);
    CHECK(jf_mean(0.0, 1.0) == 0.5);
    CHECK(jf_mean(0.798, 0.806) == doctest::Approx(0.802).epsilon(1e-12));
}

TEST_CASE("multi-object scoring averages per-object scores") {
    // Object 1 predicted perfectly, object 2 predicted empty.
    Mask gt = make_mask(8, 8);
    for (int x = 0; x < 3; ++x) gt.at(1, x) = 1;
    for (int x = 4; x < 8; ++x) gt.at(6, x) = 2;
    Mask pred = make_mask(8, 8);
    for (int x = 0; x < 3; ++x) pred.at(1, x) = 1;

    std::vector<Mask> preds = {pred, pred, pred, pred};
    std::vector<std::optional<Mask>> gts = {gt, gt, gt, gt};
    SequenceScore s = score_sequence(preds, gts, 2);
    CHECK(s.j_mean == doctest::Approx(0.5));  // (1.0 + 0.0) / 2
    CHECK(s.f_mean == doctest::Approx(0.5));
    CHECK(s.jf == doctest::Approx(0.5));
    CHECK(*s.j_decay == doctest::Approx(0.0));
}

TEST_CASE("score_sequence skips frames without ground truth") {
    Mask gt = filled_rect(6, 6, 1, 1, 4, 4);
    std::vector<Mask> preds = {gt, gt, gt};
    std::vector<std::optional<Mask>> gts = {gt, std::nullopt, gt};
    SequenceScore s = score_sequence(preds, gts, 1);
    CHECK(s.j.size() == 2);
    CHECK(s.j_mean == 1.0);
    CHECK_FALSE(s.j_decay.has_value());
}
