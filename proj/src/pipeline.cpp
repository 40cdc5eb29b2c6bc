#include "scaleseg/pipeline.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "scaleseg/errors.hpp"

namespace scaleseg {

using nlohmann::json;

FusionMode fusion_mode_from_string(const std::string& s) {
    if (s == "attention") return FusionMode::attention;
    if (s == "average") return FusionMode::average;
    if (s == "scale1") return FusionMode::scale1;
    if (s == "scale2") return FusionMode::scale2;
    throw std::invalid_argument("unknown fusion mode '" + s +
                                "' (expected attention|average|scale1|scale2)");
}

std::string to_string(FusionMode m) {
    switch (m) {
        case FusionMode::attention: return "attention";
        case FusionMode::average: return "average";
        case FusionMode::scale1: return "scale1";
        case FusionMode::scale2: return "scale2";
    }
    return "attention";
}

void validate_run_config(const RunConfig& cfg) {
    if (cfg.offline_epochs < 0 || cfg.finetune_steps < 0 || cfg.adapt_steps < 0)
        throw std::invalid_argument("run config: step counts must be >= 0");
    if (!(cfg.offline_lr > 0.0) || !(cfg.finetune_lr > 0.0) || !(cfg.adapt_lr > 0.0))
        throw std::invalid_argument("run config: learning rates must be positive");
    if (cfg.beta < 0.0) throw std::invalid_argument("run config: beta must be >= 0");
    validate_scales(cfg.scales);
    validate_bilateral(cfg.bilateral);
    if (cfg.backbone.width < 1 || cfg.backbone.depth < 1 || cfg.attention_width < 1)
        throw std::invalid_argument("run config: invalid model extents");
}

std::string run_config_to_json(const RunConfig& cfg) {
    json j;
    j["offline_epochs"] = cfg.offline_epochs;
    j["offline_lr"] = cfg.offline_lr;
    j["finetune_steps"] = cfg.finetune_steps;
    j["finetune_lr"] = cfg.finetune_lr;
    j["adapt_steps"] = cfg.adapt_steps;
    j["adapt_lr"] = cfg.adapt_lr;
    j["beta"] = cfg.beta;
    j["fusion"] = to_string(cfg.fusion);
    j["s1"] = cfg.scales.s1;
    j["s2"] = cfg.scales.s2;
    j["bilateral_k"] = cfg.bilateral.k;
    j["bilateral_sigma_p"] = cfg.bilateral.sigma_p;
    j["bilateral_sigma_i"] = cfg.bilateral.sigma_i;
    j["backbone_width"] = cfg.backbone.width;
    j["backbone_depth"] = cfg.backbone.depth;
    j["attention_width"] = cfg.attention_width;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed run config JSON: ") + e.what());
    }
    RunConfig cfg;
    cfg.offline_epochs = j.value("offline_epochs", cfg.offline_epochs);
    cfg.offline_lr = j.value("offline_lr", cfg.offline_lr);
    cfg.finetune_steps = j.value("finetune_steps", cfg.finetune_steps);
    cfg.finetune_lr = j.value("finetune_lr", cfg.finetune_lr);
    cfg.adapt_steps = j.value("adapt_steps", cfg.adapt_steps);
    cfg.adapt_lr = j.value("adapt_lr", cfg.adapt_lr);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.fusion = fusion_mode_from_string(j.value("fusion", to_string(cfg.fusion)));
    cfg.scales.s1 = j.value("s1", cfg.scales.s1);
    cfg.scales.s2 = j.value("s2", cfg.scales.s2);
    cfg.bilateral.k = j.value("bilateral_k", cfg.bilateral.k);
    cfg.bilateral.sigma_p = j.value("bilateral_sigma_p", cfg.bilateral.sigma_p);
    cfg.bilateral.sigma_i = j.value("bilateral_sigma_i", cfg.bilateral.sigma_i);
    cfg.backbone.width = j.value("backbone_width", cfg.backbone.width);
    cfg.backbone.depth = j.value("backbone_depth", cfg.backbone.depth);
    cfg.attention_width = j.value("attention_width", cfg.attention_width);
    cfg.seed = j.value("seed", cfg.seed);
    validate_run_config(cfg);
    return cfg;
}

void write_run_config(const RunConfig& cfg, const std::filesystem::path& file) {
    std::ofstream os(file);
    if (!os) throw IoError("cannot write run config: " + file.string());
    os << run_config_to_json(cfg);
}

LossLog::LossLog(const std::filesystem::path& file) : os_(file) {
    if (!os_) throw IoError("cannot open loss log: " + file.string());
}

void LossLog::append(int step, const std::string& name, double value) {
    values_.push_back(value);
    if (os_.is_open()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", value);
        os_ << step << " " << name << " " << buf << "\n";
    }
}

Mask FrameResult::predicted_mask() const { return argmax_mask(fused); }

std::vector<double> FrameResult::foreground() const {
    const int h = fused.shape()[1], w = fused.shape()[2];
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    return {fused.values().begin() + plane, fused.values().begin() + 2 * plane};
}

ParamSet init_model(const RunConfig& cfg) {
    validate_run_config(cfg);
    InitRng rng(cfg.seed);
    const std::uint64_t backbone_seed = rng.next_seed();
    const std::uint64_t attn_seed = rng.next_seed();
    ParamSet params = init_backbone(backbone_seed, cfg.backbone);
    if (cfg.fusion == FusionMode::attention)
        init_attention(params, attn_seed, cfg.attention_config());
    return params;
}

PredictGraph predict_graph(const ParamSet& params, const Image& frame,
                           const std::vector<double>& guidance_fg, const RunConfig& cfg) {
    if (frame.channels != 3) throw std::invalid_argument("predict: frame must be RGB");
    const int h2 = scaled_extent(frame.h, cfg.scales.s2);
    const int w2 = scaled_extent(frame.w, cfg.scales.s2);
    const int h1 = scaled_extent(frame.h, cfg.scales.s1);
    const int w1 = scaled_extent(frame.w, cfg.scales.s1);
    if (guidance_fg.size() != static_cast<std::size_t>(frame.h) * frame.w)
        throw std::invalid_argument("predict: guidance extent does not match the frame");

    Tensor frame_t = image_to_tensor(frame);
    Tensor guid_t = Tensor::leaf({1, frame.h, frame.w}, guidance_fg, false);
    Tensor f2 = (h2 == frame.h && w2 == frame.w) ? frame_t : bilinear_resize(frame_t, h2, w2);
    Tensor g2 = (h2 == frame.h && w2 == frame.w) ? guid_t : bilinear_resize(guid_t, h2, w2);
    Tensor f1 = bilinear_resize(frame_t, h1, w1);
    Tensor g1 = bilinear_resize(guid_t, h1, w1);

    auto out1 = backbone_forward(params, f1, g1, cfg.backbone);
    auto out2 = backbone_forward(params, f2, g2, cfg.backbone);

    PredictGraph g;
    g.m_s1 = out1.probs;
    g.m_s2 = out2.probs;
    switch (cfg.fusion) {
        case FusionMode::attention:
            g.attention = attention_forward(params, out1.features, out2.features,
                                            cfg.attention_config());
            g.fused = fuse(g.attention, g.m_s1, g.m_s2);
            break;
        case FusionMode::average:
            g.fused = fuse_average(g.m_s1, g.m_s2);
            break;
        case FusionMode::scale1:
            g.fused = bilinear_resize(g.m_s1, h2, w2);
            break;
        case FusionMode::scale2:
            g.fused = g.m_s2;
            break;
    }
    return g;
}

Tensor predict_variance(const PredictGraph& g) { return variance_map(g.m_s1, g.m_s2); }

FrameResult predict_frame(const ParamSet& params, const Image& frame,
                          const std::vector<double>& guidance_fg, const RunConfig& cfg) {
    PredictGraph g = predict_graph(params, frame, guidance_fg, cfg);
    FrameResult r;
    r.fused = g.fused.detached();
    r.m_s1 = g.m_s1.detached();
    r.m_s2 = g.m_s2.detached();
    if (g.attention.valid()) r.attention = g.attention.detached();
    r.variance = predict_variance(g).detached();
    return r;
}

namespace {

std::vector<double> mask_fg_values(const Mask& mask, int object) {
    std::vector<double> v(mask.labels.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = mask.labels[i] == object ? 1.0 : 0.0;
    return v;
}

}  // namespace

ParamSet offline_train(const std::vector<VideoSequence>& train_set, const RunConfig& cfg,
                       LossLog* log) {
    validate_run_config(cfg);
    if (train_set.empty()) throw std::invalid_argument("offline_train: empty training set");
    for (const auto& seq : train_set) {
        validate_sequence(seq);
        for (std::size_t t = 0; t < seq.masks.size(); ++t)
            if (!seq.masks[t])
                throw std::invalid_argument("offline_train: sequence '" + seq.id +
                                            "' is missing the mask for frame " + std::to_string(t));
    }

    ParamSet params = init_model(cfg);
    int step = 0;
    for (int epoch = 0; epoch < cfg.offline_epochs; ++epoch) {
        for (const auto& seq : train_set) {
            for (int object = 1; object <= seq.object_count; ++object) {
                for (std::size_t t = 0; t < seq.frames.size(); ++t) {
                    // Teacher forcing: guidance is the previous frame's
                    // ground truth (the frame's own mask at t = 0).
                    const Mask& guide = t == 0 ? *seq.masks[0] : *seq.masks[t - 1];
                    PredictGraph g = predict_graph(params, seq.frames[t],
                                                   mask_fg_values(guide, object), cfg);
                    Tensor lossmap = seg_loss(g.fused, binary_mask(*seq.masks[t], object));
                    Tensor loss = variance_weighted_loss(lossmap, predict_variance(g), cfg.beta);
                    params.zero_grads();
                    backward(loss);
                    params.sgd_step(cfg.offline_lr);
                    if (log) log->append(step, "offline", loss.scalar());
                    ++step;
                }
            }
        }
    }
    params.set_version("offline");
    return params;
}

ParamSet online_finetune(const ParamSet& params, const Image& x0, const Mask& y0,
                         const RunConfig& cfg, LossLog* log) {
    validate_run_config(cfg);
    ParamSet tuned = params.snapshot();
    const std::vector<double> guidance = mask_fg_values(y0, 1);
    for (int step = 0; step < cfg.finetune_steps; ++step) {
        PredictGraph g = predict_graph(tuned, x0, guidance, cfg);
        Tensor loss = sum(seg_loss(g.fused, y0));
        tuned.zero_grads();
        backward(loss);
        tuned.sgd_step(cfg.finetune_lr);
        if (log) log->append(step, "finetune", loss.scalar());
    }
    if (cfg.finetune_steps > 0) tuned.set_version("finetuned");
    return tuned;
}

std::vector<FrameResult> run_sequence(const ParamSet& params, const SequenceInput& input,
                                      const RunConfig& cfg, int object, LossLog* log) {
    validate_run_config(cfg);
    if (input.frames.empty()) throw std::invalid_argument("run_sequence: no frames");
    if (input.first_mask.h != input.frames[0].h || input.first_mask.w != input.frames[0].w)
        throw std::invalid_argument("run_sequence: first mask extent does not match frames");

    ParamSet theta = params.snapshot();  // per-sequence isolation
    std::vector<FrameResult> results;
    std::vector<double> guidance = mask_fg_values(input.first_mask, object);
    Tensor prev_fused;  // post-adaptation prediction of frame t-1
    int log_step = 0;

    for (std::size_t t = 0; t < input.frames.size(); ++t) {
        const Image& frame = input.frames[t];
        std::optional<double> loss_before;
        if (t >= 1 && cfg.adapt_steps > 0) {
            for (int s = 0; s < cfg.adapt_steps; ++s) {
                PredictGraph g = predict_graph(theta, frame, guidance, cfg);
                Tensor v = predict_variance(g);
                Tensor li = intra_loss(g.fused, pseudo_labels(g.fused), v);
                Tensor le = inter_loss(g.fused, prev_fused, frame, input.frames[t - 1],
                                       cfg.bilateral);
                Tensor lo = online_loss(li, le);
                if (s == 0) loss_before = lo.scalar();  // loss at the unadapted parameters
                theta.zero_grads();
                backward(lo);
                theta.sgd_step(cfg.adapt_lr);
                if (log) log->append(log_step, "online", lo.scalar());
                ++log_step;
            }
            theta.set_version("adapted");
        }

        // Emit the prediction of the (possibly updated) parameters.
        PredictGraph g = predict_graph(theta, frame, guidance, cfg);
        FrameResult r;
        r.online_loss_before = loss_before;
        r.fused = g.fused.detached();
        r.m_s1 = g.m_s1.detached();
        r.m_s2 = g.m_s2.detached();
        if (g.attention.valid()) r.attention = g.attention.detached();
        Tensor v = predict_variance(g);
        r.variance = v.detached();
        if (t >= 1 && cfg.adapt_steps > 0) {
            // Re-evaluate the online loss at the adapted parameters.
            Tensor li = intra_loss(g.fused, pseudo_labels(g.fused), v);
            Tensor le =
                inter_loss(g.fused, prev_fused, frame, input.frames[t - 1], cfg.bilateral);
            r.online_loss_after = online_loss(li, le).scalar();
        }
        prev_fused = r.fused;
        guidance = r.foreground();
        results.push_back(std::move(r));
    }
    return results;
}

SequenceRun run_sequence_multi(const ParamSet& params, const SequenceInput& input,
                               const RunConfig& cfg, LossLog* log) {
    SequenceRun run;
    for (int object = 1; object <= input.object_count; ++object)
        run.per_object.push_back(run_sequence(params, input, cfg, object, log));

    const std::size_t frames = input.frames.size();
    const int h = input.frames[0].h, w = input.frames[0].w;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::size_t t = 0; t < frames; ++t) {
        Mask combined = make_mask(h, w);
        if (input.object_count == 1) {
            combined = run.per_object[0][t].predicted_mask();
        } else {
            // Argmax over per-object foreground probabilities, background
            // when no object reaches 0.5.
            std::vector<std::vector<double>> fg;
            for (const auto& obj : run.per_object) fg.push_back(obj[t].foreground());
            for (std::size_t p = 0; p < plane; ++p) {
                int best = 0;
                double bv = 0.5;
                for (int k = 0; k < input.object_count; ++k) {
                    if (fg[k][p] >= bv) {
                        bv = fg[k][p];
                        best = k + 1;
                    }
                }
                combined.labels[p] = best;
            }
        }
        run.masks.push_back(std::move(combined));
    }
    return run;
}

}  // namespace scaleseg
