// Acceptance suite: one pass/fail line per criterion. Criteria numbers may
// be passed as arguments to run a subset, e.g. `acceptance 1 4 8`.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "scaleseg/cli.hpp"
#include "scaleseg/metrics.hpp"
#include "scaleseg/pipeline.hpp"
#include "scaleseg/sequence_io.hpp"
#include "scaleseg/synthetic.hpp"

using namespace scaleseg;
using scaleseg::test::check_gradients;
using scaleseg::test::rand_probs;
using scaleseg::test::rand_tensor;

namespace fs = std::filesystem;

namespace {

int g_checks_failed = 0;

#define ACC_CHECK(cond, what)                                             \
    do {                                                                  \
        if (!(cond)) {                                                    \
            ++g_checks_failed;                                            \
            std::cout << "    check failed: " << what << "\n";            \
        }                                                                 \
    } while (0)

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1: grads

bool criterion_gradients() {
    InitRng rng(1001);
    int failures = 0;
    auto expect = [&](const char* name, const std::function<Tensor()>& build,
                      std::vector<Tensor> leaves) {
        auto res = check_gradients(build, std::move(leaves));
        if (!res.ok) {
            ++failures;
            std::cout << "    " << name << ": " << res.detail << "\n";
        }
    };

    // Tensor ops.
    for (int trial = 0; trial < 3; ++trial) {
        Tensor x = rand_tensor(rng, {2, 6, 7}, -1.0, 1.0);
        Tensor y = rand_tensor(rng, {2, 6, 7}, 0.2, 1.5);
        Tensor k = rand_tensor(rng, {3, 2, 3, 3}, -0.6, 0.6);
        Tensor c1 = rand_tensor(rng, {1, 6, 7}, 0.1, 0.9);
        expect("conv2d", [&] { return sum(sigmoid(conv2d(x, k, 1, 1))); }, {x, k});
        expect("conv2d_stride2", [&] { return sum(sigmoid(conv2d(x, k, 2, 1))); }, {x, k});
        expect("bilinear_up", [&] { return mean(sigmoid(bilinear_resize(x, 8, 8))); }, {x});
        expect("bilinear_down", [&] { return mean(sigmoid(bilinear_resize(x, 3, 5))); }, {x});
        expect("elementwise",
               [&] { return sum(mul(exp(mul(c1, sub(x, y))), sigmoid(add(x, y)))); },
               {x, y, c1});
        expect("log", [&] { return sum(log(y)); }, {y});
        expect("softmax_norm",
               [&] { return sum(mul(normalize_channels(exp(x)), softmax_channels(y))); },
               {x, y});
        expect("concat_csum",
               [&] { return sum(exp(channel_sum(concat_channels(mul(x, y), c1)))); },
               {x, y, c1});
        expect("clamp", [&] { return sum(clamp(mul(x, y), -0.4, 0.4)); }, {x, y});
    }

    // Backbone, attention, fusion, variance.
    const BackboneConfig bb{3, 2, 4, 2};
    const AttentionConfig at{6, 4};
    RunConfig rc;
    rc.backbone = bb;
    rc.attention_width = at.width;
    rc.seed = 77;
    ParamSet params = init_model(rc);
    Tensor frame1 = rand_tensor(rng, {3, 4, 4}, 0.0, 1.0, false);
    Tensor frame2 = rand_tensor(rng, {3, 8, 8}, 0.0, 1.0, false);
    Tensor guide1 = rand_tensor(rng, {1, 4, 4}, 0.0, 1.0, false);
    Tensor guide2 = rand_tensor(rng, {1, 8, 8}, 0.0, 1.0, false);
    Mask target = make_mask(8, 8);
    for (int i = 0; i < 64; ++i) target.labels[i] = (i / 8 + i % 8) % 2;

    std::vector<Tensor> model_leaves;
    for (const auto& name : params.names()) model_leaves.push_back(params.at(name));

    auto full_forward = [&] {
        auto o1 = backbone_forward(params, frame1, guide1, bb);
        auto o2 = backbone_forward(params, frame2, guide2, bb);
        Tensor a = attention_forward(params, o1.features, o2.features, at);
        Tensor fused = fuse(a, o1.probs, o2.probs);
        Tensor v = variance_map(o1.probs, o2.probs);
        return std::pair{fused, v};
    };

    // Offline objective (variance-weighted segmentation loss).
    expect("offline_loss_beta1",
           [&] {
               auto [fused, v] = full_forward();
               return variance_weighted_loss(seg_loss(fused, target), v, 1.0);
           },
           model_leaves);

    // Online objective (intra + inter). The variance weights are fixed
    // guidance (stop-gradient), so the finite-difference oracle must hold
    // them frozen too; pseudo-labels likewise.
    Image img_t = make_image(3, 8, 8);
    Image img_p = make_image(3, 8, 8);
    for (auto& v : img_t.data) v = rng.uniform();
    for (auto& v : img_p.data) v = rng.uniform();
    Tensor y_prev = rand_probs(rng, 2, 8, 8);
    Mask pseudo = make_mask(8, 8);
    for (int i = 0; i < 64; ++i) pseudo.labels[i] = (i % 3) == 0;
    Tensor v_fixed = full_forward().second.detached();
    expect("online_loss",
           [&] {
               auto [fused, v] = full_forward();
               Tensor li = intra_loss(fused, pseudo, v_fixed);
               Tensor le = inter_loss(fused, y_prev, img_t, img_p, {3, 2.0, 0.1});
               return online_loss(li, le);
           },
           model_leaves);

    return failures == 0;
}

// -------------------------------------------------------------- 2: oracles

bool criterion_oracles() {
    InitRng rng(2002);
    int bad = 0;

    // variance_map against a per-pixel double-loop KL.
    for (int trial = 0; trial < 100; ++trial) {
        const int h = rng.uniform_int(2, 5), w = rng.uniform_int(2, 5);
        Tensor m1 = rand_probs(rng, 2, h, w);
        Tensor m2 = rand_probs(rng, 2, 2 * h, 2 * w);
        Tensor v = variance_map(m1, m2);
        Tensor up = bilinear_resize(m1, 2 * h, 2 * w);
        const std::size_t plane = static_cast<std::size_t>(2 * h) * (2 * w);
        for (std::size_t p = 0; p < plane; ++p) {
            double kl = 0.0;
            for (int c = 0; c < 2; ++c) {
                const double u =
                    std::clamp(up.values()[c * plane + p], kProbEps, 1.0 - kProbEps);
                const double m =
                    std::clamp(m2.values()[c * plane + p], kProbEps, 1.0 - kProbEps);
                kl += u * std::log(u / m);
            }
            if (std::abs(v.values()[p] - std::max(0.0, kl)) > 1e-10) ++bad;
        }
    }
    ACC_CHECK(bad == 0, "variance_map deviates from the scalar KL oracle");

    // seg_loss against -log p[target].
    int bad_seg = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int h = rng.uniform_int(2, 6), w = rng.uniform_int(2, 6);
        Tensor pred = rand_probs(rng, 2, h, w);
        Mask target = make_mask(h, w);
        for (auto& l : target.labels) l = rng.uniform_int(0, 1);
        Tensor loss = seg_loss(pred, target);
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        for (std::size_t p = 0; p < plane; ++p) {
            const double prob = std::clamp(pred.values()[target.labels[p] * plane + p],
                                           kProbEps, 1.0 - kProbEps);
            if (std::abs(loss.values()[p] + std::log(prob)) > 1e-10) ++bad_seg;
        }
    }
    ACC_CHECK(bad_seg == 0, "seg_loss deviates from the scalar cross-entropy oracle");

    // bilateral weights and inter_loss against brute-force loops.
    int bad_bilateral = 0, bad_inter = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int h = rng.uniform_int(3, 6), w = rng.uniform_int(3, 6);
        Image it = make_image(3, h, w), ip = make_image(3, h, w);
        for (auto& v : it.data) v = rng.uniform();
        for (auto& v : ip.data) v = rng.uniform();
        BilateralConfig cfg{rng.uniform() < 0.5 ? 3 : 5, rng.uniform_in(1.0, 3.0),
                            rng.uniform_in(0.05, 0.3)};
        const int r = cfg.k / 2;
        const int py = rng.uniform_int(0, h - 1), px = rng.uniform_int(0, w - 1);
        double norm = 0.0;
        for (int qy = std::max(0, py - r); qy <= std::min(h - 1, py + r); ++qy)
            for (int qx = std::max(0, px - r); qx <= std::min(w - 1, px + r); ++qx) {
                const double dy = py - qy, dx = px - qx;
                double di = 0.0;
                for (int c = 0; c < 3; ++c) {
                    const double d = it.at(c, py, px) - ip.at(c, qy, qx);
                    di += d * d;
                }
                norm += std::exp(-(dy * dy + dx * dx) / (2 * cfg.sigma_p * cfg.sigma_p) -
                                 di / (2 * cfg.sigma_i * cfg.sigma_i));
            }
        const int qy = std::clamp(py + rng.uniform_int(-r, r), 0, h - 1);
        const int qx = std::clamp(px + rng.uniform_int(-r, r), 0, w - 1);
        const double dy = py - qy, dx = px - qx;
        double di = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double d = it.at(c, py, px) - ip.at(c, qy, qx);
            di += d * d;
        }
        const double expected =
            std::exp(-(dy * dy + dx * dx) / (2 * cfg.sigma_p * cfg.sigma_p) -
                     di / (2 * cfg.sigma_i * cfg.sigma_i)) /
            norm;
        if (std::abs(bilateral_weight(py, px, qy, qx, it, ip, cfg) - expected) > 1e-10)
            ++bad_bilateral;

        Tensor yt = rand_probs(rng, 2, h, w);
        Tensor yp = rand_probs(rng, 2, h, w);
        double total = 0.0;
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        for (int ay = 0; ay < h; ++ay)
            for (int ax = 0; ax < w; ++ax) {
                double n2 = 0.0;
                for (int by = std::max(0, ay - r); by <= std::min(h - 1, ay + r); ++by)
                    for (int bx = std::max(0, ax - r); bx <= std::min(w - 1, ax + r); ++bx)
                        n2 += bilateral_unnormalized(ay, ax, by, bx, it, ip, cfg);
                for (int by = std::max(0, ay - r); by <= std::min(h - 1, ay + r); ++by)
                    for (int bx = std::max(0, ax - r); bx <= std::min(w - 1, ax + r); ++bx)
                        total += bilateral_unnormalized(ay, ax, by, bx, it, ip, cfg) / n2 *
                                 std::abs(yt.values()[plane + ay * w + ax] -
                                          yp.values()[plane + by * w + bx]);
            }
        if (std::abs(inter_loss(yt, yp, it, ip, cfg).scalar() - total) > 1e-10) ++bad_inter;
    }
    ACC_CHECK(bad_bilateral == 0, "bilateral_weight deviates from the brute-force oracle");
    ACC_CHECK(bad_inter == 0, "inter_loss deviates from the brute-force oracle");
    return bad == 0 && bad_seg == 0 && bad_bilateral == 0 && bad_inter == 0;
}

// ------------------------------------------------------------ 3: endpoints

bool criterion_fuse_endpoints() {
    InitRng rng(3003);
    int bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int h = rng.uniform_int(2, 5), w = rng.uniform_int(2, 5);
        const int h2 = 2 * h, w2 = 2 * w;
        Tensor m1 = rand_probs(rng, 2, h, w);
        Tensor m2 = rand_probs(rng, 2, h2, w2);
        Tensor at_one = fuse_raw(Tensor::full({1, h, w}, 1.0), m1, m2);
        Tensor up = bilinear_resize(m1, h2, w2);
        for (std::size_t i = 0; i < at_one.size(); ++i)
            if (at_one.values()[i] != up.values()[i]) ++bad;
        Tensor at_zero = fuse_raw(Tensor::zeros({1, h, w}), m1, m2);
        for (std::size_t i = 0; i < at_zero.size(); ++i)
            if (at_zero.values()[i] != m2.values()[i]) ++bad;
    }
    ACC_CHECK(bad == 0, "fusion endpoint identities are not exact");
    return bad == 0;
}

// ----------------------------------------------------- 4: degenerate modes

bool criterion_degenerate() {
    InitRng rng(4004);
    bool ok = true;

    // beta = 0 collapses the weighted loss to the exact sum.
    for (int trial = 0; trial < 50; ++trial) {
        Tensor lm = rand_tensor(rng, {1, 5, 5}, 0.0, 3.0, false);
        Tensor v = rand_tensor(rng, {1, 5, 5}, 0.0, 2.0, false);
        if (variance_weighted_loss(lm, v, 0.0).scalar() != sum(lm).scalar()) ok = false;
    }
    ACC_CHECK(ok, "beta=0 does not reduce to the plain summed loss exactly");

    // k = 1 with equal intensities collapses to the temporal L1.
    bool l1_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        const int h = rng.uniform_int(2, 6), w = rng.uniform_int(2, 6);
        Image img = make_image(3, h, w);
        for (auto& x : img.data) x = rng.uniform();
        Tensor yt = rand_probs(rng, 2, h, w);
        Tensor yp = rand_probs(rng, 2, h, w);
        double l1 = 0.0;
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        for (std::size_t p = 0; p < plane; ++p)
            l1 += std::abs(yt.values()[plane + p] - yp.values()[plane + p]);
        if (inter_loss(yt, yp, img, img, {1, 2.0, 0.1}).scalar() != l1) l1_ok = false;
    }
    ACC_CHECK(l1_ok, "k=1 with equal intensities is not the exact temporal L1");

    // adapt --steps 0 is bit-identical to infer, through the CLI.
    fs::path dir = fs::temp_directory_path() / "scaleseg_acc_degenerate";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "gen.json")
        << R"({"width":16,"height":16,"frame_count":3,"base_radius":4.0,)"
        << R"("velocity_x":0.5,"velocity_y":0.3,"noise":0.02})";
    bool cli_ok =
        run_cli({"gen-data", "--config", (dir / "gen.json").string(), "--out",
                 (dir / "data").string(), "--count", "2", "--seed", "4"}) == 0;
    cli_ok = cli_ok && run_cli({"train", "--data", (dir / "data").string(), "--out",
                                (dir / "m.ckpt").string(), "--epochs", "1", "--lr", "1e-3",
                                "--seed", "4", "--width", "2", "--depth", "2", "--attn-width",
                                "3", "--fusion", "attention", "--beta", "1.0"}) == 0;
    cli_ok = cli_ok && run_cli({"infer", "--checkpoint", (dir / "m.ckpt").string(), "--data",
                                (dir / "data").string(), "--out", (dir / "infer").string()}) == 0;
    cli_ok = cli_ok &&
             run_cli({"adapt", "--checkpoint", (dir / "m.ckpt").string(), "--data",
                      (dir / "data").string(), "--steps", "0", "--out",
                      (dir / "adapt0").string()}) == 0;
    bool trees_ok = cli_ok;
    if (cli_ok) {
        std::vector<fs::path> ra, rb;
        for (const auto& e : fs::recursive_directory_iterator(dir / "infer"))
            if (e.is_regular_file()) ra.push_back(fs::relative(e.path(), dir / "infer"));
        for (const auto& e : fs::recursive_directory_iterator(dir / "adapt0"))
            if (e.is_regular_file()) rb.push_back(fs::relative(e.path(), dir / "adapt0"));
        std::sort(ra.begin(), ra.end());
        std::sort(rb.begin(), rb.end());
        trees_ok = ra == rb;
        auto slurp = [](const fs::path& p) {
            std::ifstream is(p, std::ios::binary);
            std::ostringstream os;
            os << is.rdbuf();
            return os.str();
        };
        if (trees_ok)
            for (const auto& rel : ra)
                if (slurp(dir / "infer" / rel) != slurp(dir / "adapt0" / rel)) trees_ok = false;
    }
    ACC_CHECK(trees_ok, "adapt --steps 0 output differs from infer");
    fs::remove_all(dir);
    return ok && l1_ok && trees_ok;
}

// --------------------------------------------- 5/6/7: benchmark directions

struct SeedOutcome {
    double jf_attn0 = 0, jf_avg = 0, jf_s1 = 0, jf_s2 = 0;
    double f_attn0 = 0, f_attn1 = 0;
    double jdecay0 = 0, jdecay1 = 0, jdecay3 = 0;
    long improved = 0, counted = 0;
};

RunConfig benchmark_config(std::uint64_t seed) {
    RunConfig cfg;
    cfg.offline_epochs = 5;
    cfg.offline_lr = 5e-4;
    cfg.adapt_lr = 2e-5;
    cfg.seed = seed;
    return cfg;
}

std::vector<VideoSequence> benchmark_sequences(std::uint64_t seed, int count, bool heldout) {
    SyntheticConfig base;
    base.width = 64;
    base.height = 64;
    base.frame_count = 20;
    base.base_radius = 9.0;
    base.velocity_x = 1.2;
    base.velocity_y = 1.2;
    base.scale_rate = 0.025;  // progressive scale change throughout
    base.noise = 0.03;
    base.texture = 0.2;
    InitRng seeder(seed * 7919 + (heldout ? 31337 : 0));
    std::vector<VideoSequence> out;
    for (int i = 0; i < count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "%s%03d", heldout ? "held" : "train", i);
        out.push_back(generate_synthetic(randomized_config(base, seeder.next_seed(), id)));
    }
    return out;
}

struct EvalOutcome {
    double jf = 0, f = 0, jdecay = 0;
    long improved = 0, counted = 0;
};

EvalOutcome evaluate(const ParamSet& params, const std::vector<VideoSequence>& heldout,
                     RunConfig cfg, FusionMode fusion, int steps) {
    cfg.fusion = fusion;
    cfg.adapt_steps = steps;
    EvalOutcome out;
    int decay_n = 0;
    for (const auto& seq : heldout) {
        auto results = run_sequence(params, to_input(seq), cfg);
        std::vector<Mask> preds;
        for (const auto& r : results) preds.push_back(r.predicted_mask());
        SequenceScore score = score_sequence(preds, seq.masks, 1);
        out.jf += score.jf;
        out.f += score.f_mean;
        if (score.j_decay) {
            out.jdecay += *score.j_decay;
            ++decay_n;
        }
        for (const auto& r : results) {
            if (!r.online_loss_before) continue;
            if (*r.online_loss_before > 1e-12) {
                ++out.counted;
                out.improved += *r.online_loss_after < *r.online_loss_before;
            }
        }
    }
    out.jf /= heldout.size();
    out.f /= heldout.size();
    if (decay_n) out.jdecay /= decay_n;
    return out;
}

SeedOutcome run_benchmark_seed(std::uint64_t seed, bool verbose) {
    auto train = benchmark_sequences(seed, 10, false);
    auto heldout = benchmark_sequences(seed, 5, true);

    RunConfig cfg = benchmark_config(seed);
    RunConfig cfg_avg = cfg;
    cfg_avg.fusion = FusionMode::average;
    cfg_avg.beta = 0.0;
    RunConfig cfg_attn0 = cfg;
    cfg_attn0.fusion = FusionMode::attention;
    cfg_attn0.beta = 0.0;
    RunConfig cfg_attn1 = cfg;
    cfg_attn1.fusion = FusionMode::attention;
    cfg_attn1.beta = 1.0;

    ParamSet p_avg = offline_train(train, cfg_avg);
    ParamSet p_attn0 = offline_train(train, cfg_attn0);
    ParamSet p_attn1 = offline_train(train, cfg_attn1);

    SeedOutcome o;
    auto e_attn0 = evaluate(p_attn0, heldout, cfg_attn0, FusionMode::attention, 0);
    auto e_avg = evaluate(p_avg, heldout, cfg_avg, FusionMode::average, 0);
    auto e_s1 = evaluate(p_avg, heldout, cfg_avg, FusionMode::scale1, 0);
    auto e_s2 = evaluate(p_avg, heldout, cfg_avg, FusionMode::scale2, 0);
    auto e_attn1_0 = evaluate(p_attn1, heldout, cfg_attn1, FusionMode::attention, 0);
    auto e_attn1_1 = evaluate(p_attn1, heldout, cfg_attn1, FusionMode::attention, 1);
    auto e_attn1_3 = evaluate(p_attn1, heldout, cfg_attn1, FusionMode::attention, 3);

    o.jf_attn0 = e_attn0.jf;
    o.jf_avg = e_avg.jf;
    o.jf_s1 = e_s1.jf;
    o.jf_s2 = e_s2.jf;
    o.f_attn0 = e_attn0.f;
    o.f_attn1 = e_attn1_0.f;
    o.jdecay0 = e_attn1_0.jdecay;
    o.jdecay1 = e_attn1_1.jdecay;
    o.jdecay3 = e_attn1_3.jdecay;
    o.improved = e_attn1_1.improved + e_attn1_3.improved;
    o.counted = e_attn1_1.counted + e_attn1_3.counted;
    if (verbose)
        std::printf(
            "    seed %llu: J&F attn %.4f avg %.4f s1 %.4f s2 %.4f | F b0 %.4f b1 %.4f | "
            "J-decay %.4f/%.4f/%.4f | loss-improved %ld/%ld\n",
            static_cast<unsigned long long>(seed), o.jf_attn0, o.jf_avg, o.jf_s1, o.jf_s2,
            o.f_attn0, o.f_attn1, o.jdecay0, o.jdecay1, o.jdecay3, o.improved, o.counted);
    return o;
}

std::vector<SeedOutcome>& benchmark_outcomes() {
    static std::vector<SeedOutcome> outcomes;
    if (outcomes.empty())
        for (std::uint64_t seed = 0; seed < 5; ++seed)
            outcomes.push_back(run_benchmark_seed(seed, true));
    return outcomes;
}

bool criterion_ms_direction() {
    const auto& o = benchmark_outcomes();
    double attn = 0, avg = 0, s1 = 0, s2 = 0;
    for (const auto& s : o) {
        attn += s.jf_attn0;
        avg += s.jf_avg;
        s1 += s.jf_s1;
        s2 += s.jf_s2;
    }
    attn /= o.size();
    avg /= o.size();
    s1 /= o.size();
    s2 /= o.size();
    std::printf("    mean J&F: attention %.4f, average %.4f, scale1 %.4f, scale2 %.4f\n", attn,
                avg, s1, s2);
    ACC_CHECK(attn >= avg, "attention fusion below the averaging baseline");
    ACC_CHECK(avg >= std::max(s1, s2) - 0.005, "averaging below best single-scale - 0.5pt");
    return attn >= avg && avg >= std::max(s1, s2) - 0.005;
}

bool criterion_var_direction() {
    const auto& o = benchmark_outcomes();
    double delta = 0;
    int improved = 0;
    for (const auto& s : o) {
        delta += s.f_attn1 - s.f_attn0;
        improved += s.f_attn1 > s.f_attn0;
    }
    delta /= o.size();
    std::printf("    boundary F change with beta=1: %+.4f, improved on %d/5 seeds\n", delta,
                improved);
    ACC_CHECK(delta >= -0.002, "variance regularization costs more than 0.2pt of F");
    ACC_CHECK(improved >= 3, "variance regularization helps F on fewer than 3 of 5 seeds");
    return delta >= -0.002 && improved >= 3;
}

bool criterion_adaptation_direction() {
    const auto& o = benchmark_outcomes();
    double d0 = 0, d1 = 0, d3 = 0;
    long improved = 0, counted = 0;
    for (const auto& s : o) {
        d0 += s.jdecay0;
        d1 += s.jdecay1;
        d3 += s.jdecay3;
        improved += s.improved;
        counted += s.counted;
    }
    d0 /= o.size();
    d1 /= o.size();
    d3 /= o.size();
    const double rate = counted ? static_cast<double>(improved) / counted : 0.0;
    std::printf("    mean J-decay: steps0 %.4f, steps1 %.4f, steps3 %.4f; loss reduced on "
                "%.1f%% of frames\n",
                d0, d1, d3, 100.0 * rate);
    ACC_CHECK(d1 <= d0, "1-step adaptation does not improve J-decay");
    ACC_CHECK(d3 <= d0, "3-step adaptation does not improve J-decay");
    ACC_CHECK(rate >= 0.9, "online loss reduced on fewer than 90% of frames");
    return d1 <= d0 && d3 <= d0 && rate >= 0.9;
}

// ------------------------------------------------------- 8: metric sanity

bool criterion_metrics() {
    bool ok = true;
    Mask full = make_mask(8, 8, 1);
    Mask empty = make_mask(8, 8, 0);
    Mask half = make_mask(8, 8, 0);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 4; ++x) half.at(y, x) = 1;
    ok &= jaccard(full, full) == 1.0;
    ok &= jaccard(empty, full) == 0.0;
    ok &= jaccard(half, full) == 0.5;
    ok &= jaccard(empty, empty) == 1.0;
    ACC_CHECK(ok, "jaccard examples");

    Mask sq = make_mask(12, 12);
    for (int y = 3; y < 8; ++y)
        for (int x = 3; x < 8; ++x) sq.at(y, x) = 1;
    Mask sq_shift = make_mask(12, 12);
    for (int y = 3; y < 8; ++y)
        for (int x = 4; x < 9; ++x) sq_shift.at(y, x) = 1;
    bool f_ok = boundary_f(sq, sq) == 1.0 && boundary_f(empty, full) == 0.0 &&
                boundary_f(sq_shift, sq, 1, 1) == 1.0;
    ACC_CHECK(f_ok, "boundary_f examples");

    std::vector<double> lin(8);
    for (int i = 0; i < 8; ++i) lin[i] = 1.0 - i / 7.0;
    const double expect_lin = (lin[0] + lin[1]) / 2.0 - (lin[6] + lin[7]) / 2.0;
    bool d_ok = *decay({1, 1, 1, 1}) == 0.0 && *decay({1.0, 1.0, 0.0, 0.0}) == 1.0 &&
                std::abs(*decay(lin) - expect_lin) < 1e-15 && !decay({1.0, 0.5}).has_value();
    ACC_CHECK(d_ok, "decay examples");

    bool jf_ok = jf_mean(1.0, 1.0) == 1.0 && jf_mean(0.0, 1.0) == 0.5 &&
                 std::abs(jf_mean(0.798, 0.806) - 0.802) < 1e-12;
    ACC_CHECK(jf_ok, "jf_mean examples (including the published 80.2 check)");
    return ok && f_ok && d_ok && jf_ok;
}

// -------------------------------------------------------- 9: determinism

bool criterion_determinism() {
    fs::path dir = fs::temp_directory_path() / "scaleseg_acc_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "gen.json")
        << R"({"width":16,"height":16,"frame_count":3,"base_radius":4.0,)"
        << R"("velocity_x":0.5,"velocity_y":0.3,"noise":0.02})";
    const std::string bin = SCALESEG_CLI_BIN;
    auto shell = [&](const std::string& tail) {
        return std::system((bin + " " + tail + " > /dev/null 2>&1").c_str()) == 0;
    };
    auto pipeline_run = [&](const fs::path& root) {
        bool ok = shell("gen-data --config " + (dir / "gen.json").string() + " --out " +
                        (root / "data").string() + " --count 2 --seed 6");
        ok = ok && shell("train --data " + (root / "data").string() + " --out " +
                         (root / "m.ckpt").string() +
                         " --epochs 1 --lr 1e-3 --seed 6 --width 2 --depth 2 --attn-width 3");
        ok = ok && shell("adapt --checkpoint " + (root / "m.ckpt").string() + " --data " +
                         (root / "data").string() + " --steps 1 --adapt-lr 1e-4 --out " +
                         (root / "out").string());
        ok = ok && shell("eval --pred " + (root / "out").string() + " --gt " +
                         (root / "data").string());
        return ok;
    };
    bool ok = pipeline_run(dir / "a") && pipeline_run(dir / "b");
    if (ok) {
        std::vector<fs::path> ra, rb;
        for (const auto& e : fs::recursive_directory_iterator(dir / "a"))
            if (e.is_regular_file()) ra.push_back(fs::relative(e.path(), dir / "a"));
        for (const auto& e : fs::recursive_directory_iterator(dir / "b"))
            if (e.is_regular_file()) rb.push_back(fs::relative(e.path(), dir / "b"));
        std::sort(ra.begin(), ra.end());
        std::sort(rb.begin(), rb.end());
        ok = ra == rb;
        auto slurp = [](const fs::path& p) {
            std::ifstream is(p, std::ios::binary);
            std::ostringstream os;
            os << is.rdbuf();
            return os.str();
        };
        if (ok)
            for (const auto& rel : ra)
                if (slurp(dir / "a" / rel) != slurp(dir / "b" / rel)) {
                    std::cout << "    differs: " << rel.string() << "\n";
                    ok = false;
                }
    }
    ACC_CHECK(ok, "repeated full pipeline runs are not byte-identical");
    fs::remove_all(dir);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    auto enabled = [&](int n) { return wanted.empty() || wanted.count(n); };

    struct Criterion {
        int number;
        const char* label;
        std::function<bool()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "gradient suite: finite-difference checks on all ops and losses",
         criterion_gradients},
        {2, "oracle equivalence: variance map, segmentation loss, bilateral/inter loss",
         criterion_oracles},
        {3, "fusion endpoint identities (A=1 and A=0, pre-renormalization)",
         criterion_fuse_endpoints},
        {4, "degenerate reductions: beta=0, steps=0, k=1", criterion_degenerate},
        {5, "benchmark direction: attention vs averaging vs single-scale",
         criterion_ms_direction},
        {6, "benchmark direction: variance regularization and boundary F",
         criterion_var_direction},
        {7, "benchmark direction: adaptation steps, J-decay and online loss",
         criterion_adaptation_direction},
        {8, "metric sanity: jaccard, boundary F, decay, J&F examples", criterion_metrics},
        {9, "determinism: repeated CLI runs are byte-identical", criterion_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!enabled(c.number)) continue;
        auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.run();
        } catch (const std::exception& e) {
            std::cout << "    exception: " << e.what() << "\n";
        }
        std::printf("[%s] criterion %d: %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.number, c.label,
                    elapsed_s(t0));
        failures += !ok;
    }
    return failures == 0 ? 0 : 1;
}
