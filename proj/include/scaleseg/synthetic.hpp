#pragma once

#include <cstdint>
#include <string>

#include "scaleseg/video.hpp"

namespace scaleseg {

enum class ObjectShape { disc, rectangle, blob };

ObjectShape object_shape_from_string(const std::string& s);
std::string to_string(ObjectShape s);

// Controls for the synthetic moving-shape generator. All randomness (colors,
// texture phases, the noise field) is consumed when the sequence is set up;
// each frame is then a pure function of the object state at time t, so zero
// velocity and zero scale rate give identical frames.
struct SyntheticConfig {
    int width = 64;
    int height = 64;
    int frame_count = 20;
    int object_count = 1;
    ObjectShape shape = ObjectShape::disc;  // additional objects cycle shapes
    double start_x = -1.0;                  // < 0: derived from seed
    double start_y = -1.0;
    double velocity_x = 1.0;                // px/frame, object 1
    double velocity_y = 0.5;
    double scale_rate = 0.0;                // relative size change per frame
    double base_radius = 10.0;
    bool occluder = false;
    bool distractor = false;
    double noise = 0.02;     // uniform noise amplitude
    double texture = 0.15;   // sinusoidal texture contrast
    std::uint64_t seed = 0;
    std::string id = "synth";
};

// Amplitude/extent checks only (no trajectory simulation).
void validate_config_knobs(const SyntheticConfig& cfg);

// Rejects configs whose objects shrink below 4 px or leave the frame.
void validate_config(const SyntheticConfig& cfg);

VideoSequence generate_synthetic(const SyntheticConfig& cfg);

// Deterministic per-sequence variation around a base config, used by the
// benchmark and by gen-data to emit sequence families.
SyntheticConfig randomized_config(const SyntheticConfig& base, std::uint64_t seed,
                                  const std::string& id);

}  // namespace scaleseg
