#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gradcheck.hpp"
#include "scaleseg/backbone.hpp"

using namespace scaleseg;
using scaleseg::test::check_gradients;
using scaleseg::test::rand_tensor;

namespace {

const BackboneConfig kTiny{/*width=*/3, /*depth=*/2, /*input_channels=*/4, /*classes=*/2};

}  // namespace

TEST_CASE("init_backbone is deterministic in the seed") {
    ParamSet a = init_backbone(123), b = init_backbone(123), c = init_backbone(124);
    REQUIRE(a.names() == b.names());
    bool all_equal = true, any_diff = false;
    for (const auto& name : a.names()) {
        for (std::size_t i = 0; i < a.at(name).size(); ++i) {
            all_equal = all_equal && a.at(name).values()[i] == b.at(name).values()[i];
            any_diff = any_diff || a.at(name).values()[i] != c.at(name).values()[i];
        }
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("parameter count matches the documented layer table") {
    BackboneConfig cfg;  // defaults: width 8, depth 4, 4 inputs, 2 classes
    ParamSet p = init_backbone(0, cfg);
    // enc0 8x4x3x3 + enc1..3 8x8x3x3 + dec0..3 8x8x3x3 + head 2x8x1x1
    const std::size_t expected = 8 * 4 * 9 + 3 * (8 * 8 * 9) + 4 * (8 * 8 * 9) + 2 * 8;
    CHECK(backbone_param_count(cfg) == expected);
    CHECK(p.total_values() == expected);
    CHECK(p.count() == 9);

    BackboneConfig round = backbone_config_from_params(p);
    CHECK(round.width == cfg.width);
    CHECK(round.depth == cfg.depth);
    CHECK(round.input_channels == cfg.input_channels);
    CHECK(round.classes == cfg.classes);
}

TEST_CASE("forward emits valid probability maps at the input extent") {
    InitRng rng(1);
    ParamSet p = init_backbone(7, kTiny);
    for (auto [h, w] : {std::pair{8, 8}, std::pair{7, 9}, std::pair{12, 6}}) {
        Tensor frame = rand_tensor(rng, {3, h, w}, 0.0, 1.0, false);
        Tensor guide = rand_tensor(rng, {1, h, w}, 0.0, 1.0, false);
        auto out = backbone_forward(p, frame, guide, kTiny);
        REQUIRE(out.probs.shape() == Shape{2, h, w});
        REQUIRE(out.features.shape() == Shape{kTiny.width, h, w});
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        for (std::size_t px = 0; px < plane; ++px) {
            const double sum = out.probs.values()[px] + out.probs.values()[plane + px];
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(out.probs.values()[px] >= kProbEps);
            CHECK(out.probs.values()[px] <= 1.0 - kProbEps);
        }
    }
}

TEST_CASE("probability validity holds for arbitrary parameter values") {
    InitRng rng(2);
    ParamSet p = init_backbone(3, kTiny);
    for (const auto& name : p.names()) {
        auto v = p.at(name).values_mut();
        for (auto& x : v) x = rng.uniform_in(-20.0, 20.0);
    }
    Tensor frame = rand_tensor(rng, {3, 8, 8}, 0.0, 1.0, false);
    Tensor guide = Tensor::zeros({1, 8, 8});
    auto out = backbone_forward(p, frame, guide, kTiny);
    const std::size_t plane = 64;
    for (std::size_t px = 0; px < plane; ++px)
        CHECK(out.probs.values()[px] + out.probs.values()[plane + px] ==
              doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("forward is a pure function of parameters and inputs") {
    InitRng rng(4);
    ParamSet p = init_backbone(11, kTiny);
    Tensor frame = rand_tensor(rng, {3, 9, 9}, 0.0, 1.0, false);
    Tensor guide = rand_tensor(rng, {1, 9, 9}, 0.0, 1.0, false);
    auto a = backbone_forward(p, frame, guide, kTiny);
    auto b = backbone_forward(p, frame, guide, kTiny);
    for (std::size_t i = 0; i < a.probs.size(); ++i)
        CHECK(a.probs.values()[i] == b.probs.values()[i]);
}

TEST_CASE("extent mismatch between frame and guidance is rejected") {
    ParamSet p = init_backbone(0, kTiny);
    Tensor frame = Tensor::full({3, 8, 8}, 0.5);
    Tensor guide = Tensor::full({1, 6, 8}, 0.0);
    CHECK_THROWS_WITH_AS(backbone_forward(p, frame, guide, kTiny),
                         doctest::Contains("does not match guidance"), std::invalid_argument);
}

TEST_CASE("gradient of summed foreground probability w.r.t. the first kernel") {
    InitRng rng(6);
    ParamSet p = init_backbone(17, kTiny);
    Tensor frame = rand_tensor(rng, {3, 6, 6}, 0.0, 1.0, false);
    Tensor guide = rand_tensor(rng, {1, 6, 6}, 0.0, 1.0, false);
    Tensor fg_pick = Tensor::leaf({2, 6, 6}, [] {
        std::vector<double> v(72, 0.0);
        for (std::size_t i = 36; i < 72; ++i) v[i] = 1.0;
        return v;
    }(), false);
    auto build = [&] {
        auto out = backbone_forward(p, frame, guide, kTiny);
        return sum(mul(out.probs, fg_pick));
    };
    auto res = check_gradients(build, {p.at("enc0"), p.at("head")});
    CHECK_MESSAGE(res.ok, res.detail);
}
