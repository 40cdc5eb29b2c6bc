#include "scaleseg/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scaleseg/errors.hpp"
#include "scaleseg/metrics.hpp"
#include "scaleseg/pipeline.hpp"
#include "scaleseg/sequence_io.hpp"
#include "scaleseg/synthetic.hpp"

namespace scaleseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

fs::path resolve_out(std::string out, const std::string& command) {
    if (!out.empty()) return out;
    if (const char* root = std::getenv("SCALESEG_OUT_ROOT"))
        return fs::path(root) / command;
    throw std::invalid_argument("--out not given and SCALESEG_OUT_ROOT is not set");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create output directory: " + dir.string());
}

// ---------------------------------------------------------------- gen-data

SyntheticConfig synthetic_from_json(const json& j) {
    SyntheticConfig cfg;
    cfg.width = j.value("width", cfg.width);
    cfg.height = j.value("height", cfg.height);
    cfg.frame_count = j.value("frame_count", cfg.frame_count);
    cfg.object_count = j.value("object_count", cfg.object_count);
    cfg.shape = object_shape_from_string(j.value("shape", to_string(cfg.shape)));
    cfg.start_x = j.value("start_x", cfg.start_x);
    cfg.start_y = j.value("start_y", cfg.start_y);
    cfg.velocity_x = j.value("velocity_x", cfg.velocity_x);
    cfg.velocity_y = j.value("velocity_y", cfg.velocity_y);
    cfg.scale_rate = j.value("scale_rate", cfg.scale_rate);
    cfg.base_radius = j.value("base_radius", cfg.base_radius);
    cfg.occluder = j.value("occluder", cfg.occluder);
    cfg.distractor = j.value("distractor", cfg.distractor);
    cfg.noise = j.value("noise", cfg.noise);
    cfg.texture = j.value("texture", cfg.texture);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

json synthetic_to_json(const SyntheticConfig& cfg) {
    json j;
    j["width"] = cfg.width;
    j["height"] = cfg.height;
    j["frame_count"] = cfg.frame_count;
    j["object_count"] = cfg.object_count;
    j["shape"] = to_string(cfg.shape);
    j["start_x"] = cfg.start_x;
    j["start_y"] = cfg.start_y;
    j["velocity_x"] = cfg.velocity_x;
    j["velocity_y"] = cfg.velocity_y;
    j["scale_rate"] = cfg.scale_rate;
    j["base_radius"] = cfg.base_radius;
    j["occluder"] = cfg.occluder;
    j["distractor"] = cfg.distractor;
    j["noise"] = cfg.noise;
    j["texture"] = cfg.texture;
    j["seed"] = cfg.seed;
    return j;
}

int cmd_gen_data(const std::string& out_flag, const std::string& config_file, int count,
                 std::int64_t seed_flag) {
    SyntheticConfig base;
    if (!config_file.empty()) {
        std::ifstream is(config_file);
        if (!is) throw IoError("cannot open config: " + config_file);
        json j;
        try {
            is >> j;
        } catch (const json::exception& e) {
            throw std::invalid_argument("malformed config JSON: " + std::string(e.what()));
        }
        base = synthetic_from_json(j);
        count = j.value("count", count);
    }
    if (seed_flag >= 0) base.seed = static_cast<std::uint64_t>(seed_flag);
    if (count < 1) throw std::invalid_argument("gen-data: count must be >= 1");

    // Generate everything in memory first so a bad config leaves no output.
    InitRng seeder(base.seed);
    std::vector<VideoSequence> sequences;
    std::vector<SyntheticConfig> configs;
    for (int i = 0; i < count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "seq%03d", i);
        SyntheticConfig cfg = base.start_x >= 0.0 && count == 1
                                  ? base
                                  : randomized_config(base, seeder.next_seed(), id);
        cfg.id = id;
        validate_config(cfg);
        configs.push_back(cfg);
        sequences.push_back(generate_synthetic(cfg));
    }

    const fs::path out = resolve_out(out_flag, "gen-data");
    ensure_dir(out);
    json resolved = synthetic_to_json(base);
    resolved["count"] = count;
    json per_seq = json::array();
    for (const auto& c : configs) per_seq.push_back(synthetic_to_json(c));
    resolved["sequences"] = per_seq;
    std::ofstream os(out / "gen_config.json");
    if (!os) throw IoError("cannot write gen_config.json in: " + out.string());
    os << resolved.dump(2) << "\n";
    for (const auto& seq : sequences) save_sequence(seq, out / seq.id);
    std::cout << "wrote " << sequences.size() << " sequences to " << out.string() << "\n";
    return 0;
}

// ------------------------------------------------------------------- train

RunConfig load_run_config_file(const std::string& file) {
    std::ifstream is(file);
    if (!is) throw IoError("cannot open run config: " + file);
    std::stringstream ss;
    ss << is.rdbuf();
    return run_config_from_json(ss.str());
}

int cmd_train(const std::string& data, const std::string& out_flag,
              const std::string& config_file, const CLI::App* sub, RunConfig cfg) {
    if (!config_file.empty()) {
        RunConfig from_file = load_run_config_file(config_file);
        // Flags given on the command line override the file.
        RunConfig defaults;
        auto keep = [&](auto RunConfig::* field, const char* flag) {
            if (sub->count(flag) == 0) cfg.*field = from_file.*field;
        };
        keep(&RunConfig::offline_epochs, "--epochs");
        keep(&RunConfig::offline_lr, "--lr");
        keep(&RunConfig::beta, "--beta");
        keep(&RunConfig::seed, "--seed");
        if (sub->count("--fusion") == 0) cfg.fusion = from_file.fusion;
        if (sub->count("--width") == 0) cfg.backbone.width = from_file.backbone.width;
        if (sub->count("--depth") == 0) cfg.backbone.depth = from_file.backbone.depth;
        if (sub->count("--attn-width") == 0) cfg.attention_width = from_file.attention_width;
        cfg.scales = from_file.scales;
        cfg.bilateral = from_file.bilateral;
        cfg.finetune_steps = from_file.finetune_steps;
        cfg.finetune_lr = from_file.finetune_lr;
        cfg.adapt_steps = from_file.adapt_steps;
        cfg.adapt_lr = from_file.adapt_lr;
    }
    validate_run_config(cfg);

    std::vector<VideoSequence> train_set;
    for (const auto& dir : list_sequence_dirs(data)) train_set.push_back(load_sequence(dir));
    if (train_set.empty()) throw std::invalid_argument("no sequences found in: " + data);

    fs::path out = out_flag.empty() ? resolve_out("", "train") / "model.ckpt" : fs::path(out_flag);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    write_run_config(cfg, out.string() + ".config.json");
    LossLog log(out.string() + ".log");
    ParamSet params = offline_train(train_set, cfg, &log);
    params.save(out);
    std::cout << "checkpoint written to " << out.string() << "\n";
    return 0;
}

// ----------------------------------------------------------- infer / adapt

struct ModelRunFlags {
    std::string checkpoint, data, out, fusion;
    int steps = 0;
    int finetune_steps = 0;
    double adapt_lr = -1.0;
    double finetune_lr = -1.0;
};

RunConfig config_for_checkpoint(const ParamSet& params, const ModelRunFlags& flags) {
    RunConfig cfg;
    cfg.backbone = backbone_config_from_params(params);
    if (params.has("attn0")) {
        cfg.fusion = FusionMode::attention;
        cfg.attention_width = attention_config_from_params(params).width;
    } else {
        cfg.fusion = FusionMode::average;
    }
    if (!flags.fusion.empty()) cfg.fusion = fusion_mode_from_string(flags.fusion);
    if (cfg.fusion == FusionMode::attention && !params.has("attn0"))
        throw std::invalid_argument(
            "checkpoint has no attention parameters; use --fusion average|scale1|scale2");
    cfg.adapt_steps = flags.steps;
    cfg.finetune_steps = flags.finetune_steps;
    if (flags.adapt_lr > 0.0) cfg.adapt_lr = flags.adapt_lr;
    if (flags.finetune_lr > 0.0) cfg.finetune_lr = flags.finetune_lr;
    cfg.offline_epochs = 0;
    validate_run_config(cfg);
    return cfg;
}

int cmd_run_model(const ModelRunFlags& flags, const char* command) {
    ParamSet params = ParamSet::load(flags.checkpoint);
    RunConfig cfg = config_for_checkpoint(params, flags);
    const fs::path out = resolve_out(flags.out, command);
    auto dirs = list_sequence_dirs(flags.data);
    if (dirs.empty()) throw std::invalid_argument("no sequences found in: " + flags.data);

    ensure_dir(out);
    write_run_config(cfg, out / "run_config.json");
    for (const auto& dir : dirs) {
        SequenceInput input = load_sequence_input(dir);
        SequenceRun run = run_sequence_multi(params, input, cfg);

        const fs::path seq_out = out / input.id;
        ensure_dir(seq_out / "masks");
        ensure_dir(seq_out / "maps");
        const bool binary = input.object_count == 1;
        for (std::size_t t = 0; t < run.masks.size(); ++t)
            write_pgm(seq_out / "masks" / (frame_name(static_cast<int>(t)) + ".pgm"),
                      run.masks[t], binary);
        for (int k = 0; k < input.object_count; ++k) {
            const auto& frames = run.per_object[k];
            for (std::size_t t = 0; t < frames.size(); ++t) {
                const std::string stem = "_o" + std::to_string(k + 1) + "_" +
                                         frame_name(static_cast<int>(t)) + ".map";
                const Tensor& v = frames[t].variance;
                write_map(seq_out / "maps" / ("variance" + stem), v.shape()[1], v.shape()[2],
                          {v.values().begin(), v.values().end()});
                if (frames[t].attention.valid()) {
                    const Tensor& a = frames[t].attention;
                    write_map(seq_out / "maps" / ("attention" + stem), a.shape()[1], a.shape()[2],
                              {a.values().begin(), a.values().end()});
                }
            }
        }
        json manifest;
        manifest["id"] = input.id;
        manifest["frame_count"] = run.masks.size();
        manifest["object_count"] = input.object_count;
        manifest["width"] = input.frames[0].w;
        manifest["height"] = input.frames[0].h;
        std::ofstream os(seq_out / "manifest.json");
        if (!os) throw IoError("cannot write manifest in: " + seq_out.string());
        os << manifest.dump(2) << "\n";
    }
    std::cout << "results written to " << out.string() << "\n";
    return 0;
}

// -------------------------------------------------------------------- eval

struct EvalAggregate {
    double j = 0.0, f = 0.0, jf = 0.0, j_decay = 0.0, f_decay = 0.0;
    int count = 0, decay_count = 0;
};

SequenceScore eval_one(const fs::path& pred_dir, const fs::path& gt_dir) {
    VideoSequence gt = load_sequence(gt_dir);
    std::ifstream is(pred_dir / "manifest.json");
    if (!is) throw IoError("no manifest in prediction directory: " + pred_dir.string());
    json m;
    is >> m;
    const int count = m.value("frame_count", 0);
    if (count != static_cast<int>(gt.frames.size()))
        throw std::invalid_argument("prediction '" + pred_dir.filename().string() + "' has " +
                                    std::to_string(count) + " frames, ground truth has " +
                                    std::to_string(gt.frames.size()));
    std::vector<Mask> pred;
    for (int t = 0; t < count; ++t)
        pred.push_back(read_pgm(pred_dir / "masks" / (frame_name(t) + ".pgm")));
    SequenceScore score = score_sequence(pred, gt.masks, gt.object_count);

    std::ofstream os(pred_dir / "metrics.txt");
    if (!os) throw IoError("cannot write metrics file in: " + pred_dir.string());
    std::size_t line = 0;
    for (int t = 0; t < count; ++t) {
        if (!gt.masks[t]) continue;
        os << t << " " << fmt(score.j[line]) << " " << fmt(score.f[line]) << "\n";
        ++line;
    }
    return score;
}

int cmd_eval(const std::string& pred_root, const std::string& gt_root, std::string out_file) {
    std::map<std::string, fs::path> preds, gts;
    for (const auto& d : list_sequence_dirs(pred_root)) preds[d.filename().string()] = d;
    for (const auto& d : list_sequence_dirs(gt_root)) gts[d.filename().string()] = d;
    std::vector<std::string> missing_pred, missing_gt;
    for (const auto& [id, _] : gts)
        if (!preds.count(id)) missing_pred.push_back(id);
    for (const auto& [id, _] : preds)
        if (!gts.count(id)) missing_gt.push_back(id);
    if (!missing_pred.empty() || !missing_gt.empty()) {
        std::ostringstream os;
        os << "sequence id mismatch between prediction and ground truth:";
        for (const auto& id : missing_pred) os << " missing-prediction:" << id;
        for (const auto& id : missing_gt) os << " missing-ground-truth:" << id;
        throw std::invalid_argument(os.str());
    }
    if (preds.empty()) throw std::invalid_argument("no sequences to evaluate");

    std::ostringstream table, kv;
    table << "sequence          J       F       J&F     J-Decay F-Decay\n";
    EvalAggregate agg;
    for (const auto& [id, dir] : preds) {
        SequenceScore s = eval_one(dir, gts.at(id));
        table << id;
        for (std::size_t i = id.size(); i < 18; ++i) table << ' ';
        table << fmt4(s.j_mean) << "  " << fmt4(s.f_mean) << "  " << fmt4(s.jf) << "  "
              << (s.j_decay ? fmt4(*s.j_decay) : std::string("-")) << "  "
              << (s.f_decay ? fmt4(*s.f_decay) : std::string("-")) << "\n";
        kv << "seq." << id << ".j " << fmt(s.j_mean) << "\n";
        kv << "seq." << id << ".f " << fmt(s.f_mean) << "\n";
        kv << "seq." << id << ".jf " << fmt(s.jf) << "\n";
        if (s.j_decay) kv << "seq." << id << ".j_decay " << fmt(*s.j_decay) << "\n";
        if (s.f_decay) kv << "seq." << id << ".f_decay " << fmt(*s.f_decay) << "\n";
        agg.j += s.j_mean;
        agg.f += s.f_mean;
        agg.jf += s.jf;
        if (s.j_decay && s.f_decay) {
            agg.j_decay += *s.j_decay;
            agg.f_decay += *s.f_decay;
            ++agg.decay_count;
        }
        ++agg.count;
    }
    const double n = agg.count;
    table << "mean              " << fmt4(agg.j / n) << "  " << fmt4(agg.f / n) << "  "
          << fmt4(agg.jf / n) << "  "
          << (agg.decay_count ? fmt4(agg.j_decay / agg.decay_count) : std::string("-")) << "  "
          << (agg.decay_count ? fmt4(agg.f_decay / agg.decay_count) : std::string("-")) << "\n";
    kv << "mean.j " << fmt(agg.j / n) << "\n";
    kv << "mean.f " << fmt(agg.f / n) << "\n";
    kv << "mean.jf " << fmt(agg.jf / n) << "\n";
    if (agg.decay_count) {
        kv << "mean.j_decay " << fmt(agg.j_decay / agg.decay_count) << "\n";
        kv << "mean.f_decay " << fmt(agg.f_decay / agg.decay_count) << "\n";
    }
    kv << "sequence_count " << agg.count << "\n";

    std::cout << table.str();
    fs::path summary = out_file.empty() ? fs::path(pred_root) / "metrics_summary.txt"
                                        : fs::path(out_file);
    std::ofstream ts(summary);
    if (!ts) throw IoError("cannot write summary: " + summary.string());
    ts << table.str();
    fs::path kvpath = summary;
    kvpath.replace_extension(".kv");
    std::ofstream ks(kvpath);
    if (!ks) throw IoError("cannot write summary: " + kvpath.string());
    ks << kv.str();
    return 0;
}

// ------------------------------------------------------------------- sweep

int cmd_sweep(const std::string& train_data, const std::string& heldout,
              const std::string& grid_file, const std::string& out_flag) {
    std::ifstream is(grid_file);
    if (!is) throw IoError("cannot open grid file: " + grid_file);
    json grid;
    try {
        is >> grid;
    } catch (const json::exception& e) {
        throw std::invalid_argument("malformed grid JSON: " + std::string(e.what()));
    }
    std::vector<std::string> fusions = grid.value("fusion", std::vector<std::string>{"attention"});
    std::vector<double> betas = grid.value("beta", std::vector<double>{1.0});
    std::vector<int> steps_axis = grid.value("steps", std::vector<int>{0});
    RunConfig base;
    if (grid.contains("base")) {
        base = run_config_from_json(grid["base"].dump());
    }
    base.seed = grid.value("seed", base.seed);
    base.offline_epochs = grid.value("epochs", base.offline_epochs);

    const fs::path out = resolve_out(out_flag, "sweep");
    ensure_dir(out / "cells");

    std::vector<VideoSequence> train_set;
    for (const auto& dir : list_sequence_dirs(train_data)) train_set.push_back(load_sequence(dir));
    if (train_set.empty()) throw std::invalid_argument("no training sequences in: " + train_data);
    auto heldout_dirs = list_sequence_dirs(heldout);
    if (heldout_dirs.empty()) throw std::invalid_argument("no held-out sequences in: " + heldout);

    std::ostringstream table, tsv;
    table << "Ms  Var Ada steps fusion     beta   J       F       J&F     J-Decay F-Decay\n";
    tsv << "fusion\tbeta\tsteps\tj\tf\tjf\tj_decay\tf_decay\n";

    for (const auto& fusion : fusions) {
        for (double beta : betas) {
            RunConfig cfg = base;
            cfg.fusion = fusion_mode_from_string(fusion);
            cfg.beta = beta;
            validate_run_config(cfg);
            std::ostringstream key;
            key << fusion << "_beta" << beta;
            const fs::path ckpt = out / "cells" / (key.str() + ".ckpt");
            write_run_config(cfg, ckpt.string() + ".config.json");
            LossLog log(ckpt.string() + ".log");
            ParamSet params = offline_train(train_set, cfg, &log);
            params.save(ckpt);

            for (int steps : steps_axis) {
                RunConfig run_cfg = cfg;
                run_cfg.adapt_steps = steps;
                EvalAggregate agg;
                for (const auto& dir : heldout_dirs) {
                    SequenceInput input = load_sequence_input(dir);
                    SequenceRun run = run_sequence_multi(params, input, run_cfg);
                    VideoSequence gt = load_sequence(dir);
                    SequenceScore s = score_sequence(run.masks, gt.masks, gt.object_count);
                    agg.j += s.j_mean;
                    agg.f += s.f_mean;
                    agg.jf += s.jf;
                    if (s.j_decay && s.f_decay) {
                        agg.j_decay += *s.j_decay;
                        agg.f_decay += *s.f_decay;
                        ++agg.decay_count;
                    }
                    ++agg.count;
                }
                const double n = agg.count;
                const bool ms = cfg.fusion == FusionMode::attention;
                const bool var = beta > 0.0;
                const bool ada = steps > 0;
                auto mark = [](bool b) { return b ? "x  " : "   "; };
                table << mark(ms) << " " << mark(var) << " " << mark(ada) << " ";
                char row[160];
                std::snprintf(row, sizeof row, "%-5d %-10s %-6.2f %s  %s  %s  %s  %s\n", steps,
                              fusion.c_str(), beta, fmt4(agg.j / n).c_str(),
                              fmt4(agg.f / n).c_str(), fmt4(agg.jf / n).c_str(),
                              agg.decay_count ? fmt4(agg.j_decay / agg.decay_count).c_str() : "-",
                              agg.decay_count ? fmt4(agg.f_decay / agg.decay_count).c_str() : "-");
                table << row;
                tsv << fusion << "\t" << fmt(beta) << "\t" << steps << "\t" << fmt(agg.j / n)
                    << "\t" << fmt(agg.f / n) << "\t" << fmt(agg.jf / n) << "\t"
                    << (agg.decay_count ? fmt(agg.j_decay / agg.decay_count) : "-") << "\t"
                    << (agg.decay_count ? fmt(agg.f_decay / agg.decay_count) : "-") << "\n";
            }
        }
    }
    std::cout << table.str();
    std::ofstream ts(out / "sweep.txt");
    if (!ts) throw IoError("cannot write sweep table in: " + out.string());
    ts << table.str();
    std::ofstream vs(out / "sweep.tsv");
    if (!vs) throw IoError("cannot write sweep table in: " + out.string());
    vs << tsv.str();
    return 0;
}

// ----------------------------------------------------------------- inspect

int cmd_inspect(const std::string& results, const std::string& sequence, int frame) {
    auto dirs = list_sequence_dirs(results);
    if (dirs.empty()) throw std::invalid_argument("no result sequences in: " + results);
    fs::path seq_dir;
    if (!sequence.empty()) {
        seq_dir = fs::path(results) / sequence;
        if (!fs::is_directory(seq_dir))
            throw std::invalid_argument("no such result sequence: " + sequence);
    } else if (dirs.size() == 1) {
        seq_dir = dirs[0];
    } else {
        throw std::invalid_argument("--sequence required when the results hold several sequences");
    }
    std::ifstream is(seq_dir / "manifest.json");
    if (!is) throw IoError("no manifest in: " + seq_dir.string());
    json m;
    is >> m;
    const int frame_count = m.value("frame_count", 0);
    const int objects = m.value("object_count", 1);
    if (frame < 0 || frame >= frame_count)
        throw std::invalid_argument("frame " + std::to_string(frame) + " out of range [0," +
                                    std::to_string(frame_count - 1) + "]");
    ensure_dir(seq_dir / "heatmaps");
    int written = 0;
    for (int k = 1; k <= objects; ++k) {
        for (const char* kind : {"attention", "variance"}) {
            const std::string stem =
                std::string(kind) + "_o" + std::to_string(k) + "_" + frame_name(frame);
            const fs::path src = seq_dir / "maps" / (stem + ".map");
            if (!fs::exists(src)) {
                if (std::string(kind) == "attention") continue;  // absent outside attention mode
                throw IoError("missing map file: " + src.string());
            }
            int h = 0, w = 0;
            std::vector<double> values = read_map(src, h, w);
            const fs::path dst = seq_dir / "heatmaps" / (stem + ".pgm");
            export_heatmap(Tensor::leaf({1, h, w}, std::move(values), false), dst);
            std::cout << "wrote " << dst.string() << "\n";
            ++written;
        }
    }
    if (written == 0) throw std::invalid_argument("no maps found for frame " + std::to_string(frame));
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"scale-aware video object segmentation refinement workbench"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate synthetic sequences");
    std::string gen_out, gen_config;
    int gen_count = 5;
    std::int64_t gen_seed = -1;
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--config", gen_config, "synthetic config JSON");
    gen->add_option("--count", gen_count, "number of sequences");
    gen->add_option("--seed", gen_seed, "generator seed");

    // train
    auto* train = app.add_subcommand("train", "offline training");
    std::string train_data, train_out, train_config, train_fusion = "attention";
    RunConfig train_cfg;
    train->add_option("--data", train_data, "training sequence root")->required();
    train->add_option("--out", train_out, "checkpoint file");
    train->add_option("--config", train_config, "run config JSON");
    train->add_option("--beta", train_cfg.beta, "variance regularization strength");
    train->add_option("--fusion", train_fusion, "attention|average|scale1|scale2");
    train->add_option("--epochs", train_cfg.offline_epochs, "training epochs");
    train->add_option("--lr", train_cfg.offline_lr, "learning rate");
    train->add_option("--seed", train_cfg.seed, "init seed");
    train->add_option("--width", train_cfg.backbone.width, "backbone width");
    train->add_option("--depth", train_cfg.backbone.depth, "backbone depth");
    train->add_option("--attn-width", train_cfg.attention_width, "attention head width");

    // infer / adapt
    ModelRunFlags infer_flags, adapt_flags;
    auto* infer = app.add_subcommand("infer", "inference without adaptation");
    infer->add_option("--checkpoint", infer_flags.checkpoint, "checkpoint file")->required();
    infer->add_option("--data", infer_flags.data, "sequence root")->required();
    infer->add_option("--out", infer_flags.out, "results directory");
    infer->add_option("--fusion", infer_flags.fusion, "fusion mode override");

    auto* adapt = app.add_subcommand("adapt", "inference with per-frame adaptation");
    adapt->add_option("--checkpoint", adapt_flags.checkpoint, "checkpoint file")->required();
    adapt->add_option("--data", adapt_flags.data, "sequence root")->required();
    adapt->add_option("--out", adapt_flags.out, "results directory");
    adapt->add_option("--steps", adapt_flags.steps, "adaptation steps per frame");
    adapt->add_option("--finetune-steps", adapt_flags.finetune_steps, "first-frame finetune steps");
    adapt->add_option("--adapt-lr", adapt_flags.adapt_lr, "adaptation learning rate");
    adapt->add_option("--finetune-lr", adapt_flags.finetune_lr, "finetune learning rate");
    adapt->add_option("--fusion", adapt_flags.fusion, "fusion mode override");

    // eval
    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    std::string eval_pred, eval_gt, eval_out;
    eval->add_option("--pred", eval_pred, "prediction root")->required();
    eval->add_option("--gt", eval_gt, "ground-truth root")->required();
    eval->add_option("--out", eval_out, "summary file");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "ablation grid over fusion x beta x steps");
    std::string sweep_train, sweep_heldout, sweep_grid, sweep_out;
    sweep->add_option("--data", sweep_train, "training sequence root")->required();
    sweep->add_option("--heldout", sweep_heldout, "held-out sequence root")->required();
    sweep->add_option("--grid", sweep_grid, "grid JSON file")->required();
    sweep->add_option("--out", sweep_out, "output directory");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "export attention/variance heatmaps");
    std::string insp_results, insp_seq;
    int insp_frame = 0;
    inspect->add_option("--results", insp_results, "results directory")->required();
    inspect->add_option("--sequence", insp_seq, "sequence id");
    inspect->add_option("--frame", insp_frame, "frame index")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(gen_out, gen_config, gen_count, gen_seed);
        if (train->parsed()) {
            train_cfg.fusion = fusion_mode_from_string(train_fusion);
            return cmd_train(train_data, train_out, train_config, train, train_cfg);
        }
        if (infer->parsed()) return cmd_run_model(infer_flags, "infer");
        if (adapt->parsed()) return cmd_run_model(adapt_flags, "adapt");
        if (eval->parsed()) return cmd_eval(eval_pred, eval_gt, eval_out);
        if (sweep->parsed()) return cmd_sweep(sweep_train, sweep_heldout, sweep_grid, sweep_out);
        if (inspect->parsed()) return cmd_inspect(insp_results, insp_seq, insp_frame);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace scaleseg
