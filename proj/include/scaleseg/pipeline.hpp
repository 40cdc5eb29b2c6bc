#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "scaleseg/backbone.hpp"
#include "scaleseg/fusion.hpp"
#include "scaleseg/losses.hpp"
#include "scaleseg/params.hpp"
#include "scaleseg/video.hpp"

namespace scaleseg {

enum class FusionMode { attention, average, scale1, scale2 };

FusionMode fusion_mode_from_string(const std::string& s);
std::string to_string(FusionMode m);

// Full configuration of a run; serialized into every output directory.
struct RunConfig {
    int offline_epochs = 6;
    double offline_lr = 2e-4;
    int finetune_steps = 0;
    double finetune_lr = 2e-4;
    int adapt_steps = 0;
    double adapt_lr = 2e-5;
    double beta = 1.0;
    FusionMode fusion = FusionMode::attention;
    ScaleConfig scales;
    BilateralConfig bilateral;
    BackboneConfig backbone;
    int attention_width = 16;
    std::uint64_t seed = 0;

    AttentionConfig attention_config() const {
        return {2 * backbone.width, attention_width};
    }
};

void validate_run_config(const RunConfig& cfg);
std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);
void write_run_config(const RunConfig& cfg, const std::filesystem::path& file);

// Appends "step <name> <value>" lines; the loss-curve record of a run.
class LossLog {
public:
    LossLog() = default;
    explicit LossLog(const std::filesystem::path& file);
    void append(int step, const std::string& name, double value);
    const std::vector<double>& values() const { return values_; }

private:
    std::ofstream os_;
    std::vector<double> values_;
};

struct FrameMetrics {
    double j = 0.0;
    double f = 0.0;
};

// Everything one frame produces: detached value tensors at the resolutions
// the fusion contracts define.
struct FrameResult {
    Tensor fused;      // (2, H2, W2)
    Tensor m_s1;       // (2, H1, W1)
    Tensor m_s2;       // (2, H2, W2)
    Tensor attention;  // (1, H1, W1); empty outside attention mode
    Tensor variance;   // (1, H2, W2)
    std::optional<double> online_loss_before;  // adaptation bookkeeping, t >= 1
    std::optional<double> online_loss_after;
    std::optional<FrameMetrics> metrics;  // filled by evaluation, never by adaptation

    Mask predicted_mask() const;                  // argmax labels {0,1}
    std::vector<double> foreground() const;       // fused fg channel values
};

// Backbone + attention parameters for the configured fusion mode.
ParamSet init_model(const RunConfig& cfg);

// Live (un-detached) graph of one frame's prediction, for loss building.
struct PredictGraph {
    Tensor m_s1, m_s2, attention, fused;
};
PredictGraph predict_graph(const ParamSet& params, const Image& frame,
                           const std::vector<double>& guidance_fg, const RunConfig& cfg);
Tensor predict_variance(const PredictGraph& g);

FrameResult predict_frame(const ParamSet& params, const Image& frame,
                          const std::vector<double>& guidance_fg, const RunConfig& cfg);

// Offline training over fully annotated sequences (per-frame SGD on the
// variance-weighted segmentation loss, teacher-forced guidance).
ParamSet offline_train(const std::vector<VideoSequence>& train_set, const RunConfig& cfg,
                       LossLog* log = nullptr);

// First-frame fine-tuning; the input parameters are copied, not touched.
ParamSet online_finetune(const ParamSet& params, const Image& x0, const Mask& y0,
                         const RunConfig& cfg, LossLog* log = nullptr);

// Sequential inference with optional per-frame self-supervised adaptation.
// Parameters evolve frame to frame within the call; the caller's set is
// never modified. Binary (single-object) path.
std::vector<FrameResult> run_sequence(const ParamSet& params, const SequenceInput& input,
                                      const RunConfig& cfg, int object = 1,
                                      LossLog* log = nullptr);

// Per-object binary decomposition plus argmax recombination.
struct SequenceRun {
    std::vector<Mask> masks;                          // combined labels per frame
    std::vector<std::vector<FrameResult>> per_object; // [object][frame]
};
SequenceRun run_sequence_multi(const ParamSet& params, const SequenceInput& input,
                               const RunConfig& cfg, LossLog* log = nullptr);

}  // namespace scaleseg
