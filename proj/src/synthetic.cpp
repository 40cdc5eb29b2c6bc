#include "scaleseg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "scaleseg/params.hpp"

namespace scaleseg {

SequenceInput to_input(const VideoSequence& seq) {
    validate_sequence(seq);
    SequenceInput in;
    in.id = seq.id;
    in.frames = seq.frames;
    in.first_mask = *seq.masks[0];
    in.object_count = seq.object_count;
    return in;
}

void validate_sequence(const VideoSequence& seq) {
    if (seq.frames.empty()) throw std::invalid_argument("sequence '" + seq.id + "' has no frames");
    if (seq.masks.size() != seq.frames.size())
        throw std::invalid_argument("sequence '" + seq.id + "': mask list length mismatch");
    if (!seq.masks[0].has_value())
        throw std::invalid_argument("sequence '" + seq.id + "' is missing the first-frame mask");
    const Image& f0 = seq.frames[0];
    for (const auto& f : seq.frames)
        if (f.h != f0.h || f.w != f0.w || f.channels != f0.channels)
            throw std::invalid_argument("sequence '" + seq.id + "': frame extents differ");
    for (const auto& m : seq.masks)
        if (m && (m->h != f0.h || m->w != f0.w))
            throw std::invalid_argument("sequence '" + seq.id + "': mask extent differs from frames");
}

ObjectShape object_shape_from_string(const std::string& s) {
    if (s == "disc") return ObjectShape::disc;
    if (s == "rectangle") return ObjectShape::rectangle;
    if (s == "blob") return ObjectShape::blob;
    throw std::invalid_argument("unknown object shape '" + s + "'");
}

std::string to_string(ObjectShape s) {
    switch (s) {
        case ObjectShape::disc: return "disc";
        case ObjectShape::rectangle: return "rectangle";
        case ObjectShape::blob: return "blob";
    }
    return "disc";
}

namespace {

constexpr double kPi = std::numbers::pi;

struct ObjectState {
    ObjectShape shape;
    double cx, cy, vx, vy, radius, scale_rate;
    double color[3];
    double phase;

    double cx_at(int t) const { return cx + vx * t; }
    double cy_at(int t) const { return cy + vy * t; }
    double radius_at(int t) const { return radius * std::pow(1.0 + scale_rate, t); }

    // Worst-case circumscribing radius (blob lobes extend past the base radius).
    double bound_at(int t) const {
        double r = radius_at(t);
        return shape == ObjectShape::blob ? 1.4 * r : r;
    }

    bool inside(double px, double py, int t) const {
        const double dx = px - cx_at(t);
        const double dy = py - cy_at(t);
        const double r = radius_at(t);
        switch (shape) {
            case ObjectShape::disc:
                return dx * dx + dy * dy <= r * r;
            case ObjectShape::rectangle:
                return std::abs(dx) <= r && std::abs(dy) <= 0.7 * r;
            case ObjectShape::blob: {
                const double theta = std::atan2(dy, dx);
                const double rb = r * (1.0 + 0.25 * std::sin(3.0 * theta + phase) +
                                       0.12 * std::sin(5.0 * theta + 2.0 * phase));
                return dx * dx + dy * dy <= rb * rb;
            }
        }
        return false;
    }
};

ObjectShape cycle_shape(ObjectShape first, int k) {
    const ObjectShape all[3] = {ObjectShape::disc, ObjectShape::rectangle, ObjectShape::blob};
    int base = 0;
    for (int i = 0; i < 3; ++i)
        if (all[i] == first) base = i;
    return all[(base + k) % 3];
}

std::vector<ObjectState> build_objects(const SyntheticConfig& cfg, InitRng& rng) {
    std::vector<ObjectState> objs;
    for (int k = 0; k < cfg.object_count; ++k) {
        ObjectState o{};
        o.shape = cycle_shape(cfg.shape, k);
        o.radius = cfg.base_radius * (k == 0 ? 1.0 : rng.uniform_in(0.7, 1.0));
        o.scale_rate = k == 0 ? cfg.scale_rate : 0.0;
        if (k == 0 && cfg.start_x >= 0.0 && cfg.start_y >= 0.0) {
            o.cx = cfg.start_x;
            o.cy = cfg.start_y;
        } else {
            // Deterministic placement: object k starts in its own quadrant-ish
            // band so multi-object sequences do not start overlapped.
            double fx = rng.uniform_in(0.32, 0.68);
            double fy = rng.uniform_in(0.32, 0.68);
            if (cfg.object_count > 1) {
                fx = (k % 2 == 0) ? rng.uniform_in(0.25, 0.4) : rng.uniform_in(0.6, 0.75);
                fy = (k / 2 % 2 == 0) ? rng.uniform_in(0.25, 0.45) : rng.uniform_in(0.55, 0.75);
            }
            o.cx = fx * (cfg.width - 1);
            o.cy = fy * (cfg.height - 1);
        }
        if (k == 0) {
            o.vx = cfg.velocity_x;
            o.vy = cfg.velocity_y;
        } else {
            o.vx = rng.uniform_in(-0.8, 0.8);
            o.vy = rng.uniform_in(-0.8, 0.8);
        }
        for (double& c : o.color) c = rng.uniform_in(0.55, 0.95);
        o.phase = rng.uniform_in(0.0, 2.0 * kPi);
        objs.push_back(o);
    }
    return objs;
}

}  // namespace

void validate_config_knobs(const SyntheticConfig& cfg) {
    if (cfg.width < 8 || cfg.height < 8)
        throw std::invalid_argument("synthetic config: frame extent must be at least 8x8");
    if (cfg.frame_count < 2)
        throw std::invalid_argument("synthetic config: frame count must be >= 2");
    if (cfg.object_count < 1 || cfg.object_count > 4)
        throw std::invalid_argument("synthetic config: object count must be in [1,4]");
    if (std::abs(cfg.scale_rate) >= 0.5)
        throw std::invalid_argument("synthetic config: scale rate magnitude must be < 0.5");
    if (cfg.noise < 0.0 || cfg.noise > 0.5 || cfg.texture < 0.0 || cfg.texture > 1.0)
        throw std::invalid_argument("synthetic config: noise/texture amplitude out of range");
    if (cfg.base_radius < 2.0)
        throw std::invalid_argument("synthetic config: base radius must be >= 2 px");
}

void validate_config(const SyntheticConfig& cfg) {
    validate_config_knobs(cfg);

    InitRng rng(cfg.seed);
    auto objs = build_objects(cfg, rng);
    for (std::size_t k = 0; k < objs.size(); ++k) {
        for (int t = 0; t < cfg.frame_count; ++t) {
            const auto& o = objs[k];
            if (2.0 * o.radius_at(t) < 4.0)
                throw std::invalid_argument("synthetic config: object " + std::to_string(k + 1) +
                                            " shrinks below 4 px at frame " + std::to_string(t));
            const double b = o.bound_at(t);
            if (o.cx_at(t) - b < 0.0 || o.cx_at(t) + b > cfg.width - 1.0 ||
                o.cy_at(t) - b < 0.0 || o.cy_at(t) + b > cfg.height - 1.0)
                throw std::invalid_argument("synthetic config: object " + std::to_string(k + 1) +
                                            " leaves the frame at frame " + std::to_string(t));
        }
    }
}

VideoSequence generate_synthetic(const SyntheticConfig& cfg) {
    validate_config(cfg);
    InitRng rng(cfg.seed);
    auto objs = build_objects(cfg, rng);

    // Background gradient endpoints, texture waves and the static noise field
    // are all fixed at setup; frames vary only through object state.
    double bg0[3], bg1[3];
    for (int c = 0; c < 3; ++c) bg0[c] = rng.uniform_in(0.08, 0.45);
    for (int c = 0; c < 3; ++c) bg1[c] = rng.uniform_in(0.08, 0.45);
    const double bg_fx = rng.uniform_in(0.06, 0.16);
    const double bg_fy = rng.uniform_in(0.06, 0.16);
    const double bg_ph = rng.uniform_in(0.0, 2.0 * kPi);
    const double obj_fx = rng.uniform_in(0.15, 0.35);
    const double obj_fy = rng.uniform_in(0.15, 0.35);
    const double obj_ph = rng.uniform_in(0.0, 2.0 * kPi);

    ObjectState distractor{};
    if (cfg.distractor) {
        distractor.shape = cycle_shape(cfg.shape, 1);
        distractor.radius = 0.8 * cfg.base_radius;
        distractor.scale_rate = 0.0;
        distractor.cx = rng.uniform_in(0.2, 0.8) * (cfg.width - 1);
        distractor.cy = rng.uniform_in(0.2, 0.8) * (cfg.height - 1);
        distractor.vx = rng.uniform_in(-0.6, 0.6);
        distractor.vy = rng.uniform_in(-0.6, 0.6);
        for (int c = 0; c < 3; ++c)
            distractor.color[c] = std::clamp(objs[0].color[c] + rng.uniform_in(-0.1, 0.1), 0.0, 1.0);
        distractor.phase = rng.uniform_in(0.0, 2.0 * kPi);
    }

    double occ_color[3];
    for (double& c : occ_color) c = rng.uniform_in(0.3, 0.7);
    const double occ_w = 0.18 * cfg.width;

    std::vector<double> noise_field(static_cast<std::size_t>(3) * cfg.height * cfg.width);
    for (double& v : noise_field) v = rng.uniform_signed(1.0);

    VideoSequence seq;
    seq.id = cfg.id;
    seq.object_count = cfg.object_count;

    const double sub[2] = {0.25, 0.75};
    for (int t = 0; t < cfg.frame_count; ++t) {
        Image frame = make_image(3, cfg.height, cfg.width);
        Mask mask = make_mask(cfg.height, cfg.width);
        // Occluder sweeps left to right across the sequence.
        const double occ_x0 =
            cfg.occluder ? -occ_w + (cfg.width + occ_w) * t / (cfg.frame_count - 1.0) : -1e9;

        for (int y = 0; y < cfg.height; ++y) {
            for (int x = 0; x < cfg.width; ++x) {
                const double gx = cfg.width > 1 ? double(x) / (cfg.width - 1) : 0.0;
                const double gy = cfg.height > 1 ? double(y) / (cfg.height - 1) : 0.0;
                const double bg_wave =
                    cfg.texture * std::sin(2.0 * kPi * (bg_fx * x + bg_fy * y) + bg_ph);
                double px[3];
                for (int c = 0; c < 3; ++c)
                    px[c] = bg0[c] + (bg1[c] - bg0[c]) * 0.5 * (gx + gy) + bg_wave;

                auto blend_object = [&](const ObjectState& o) {
                    int hits = 0;
                    for (double oy : sub)
                        for (double ox : sub)
                            if (o.inside(x + ox, y + oy, t)) ++hits;
                    if (hits == 0) return 0.0;
                    const double cov = hits / 4.0;
                    const double wave =
                        cfg.texture * std::sin(2.0 * kPi * (obj_fx * x + obj_fy * y) + obj_ph);
                    for (int c = 0; c < 3; ++c)
                        px[c] = px[c] * (1.0 - cov) + (o.color[c] + wave) * cov;
                    return cov;
                };

                if (cfg.distractor) blend_object(distractor);
                int label = 0;
                for (int k = 0; k < cfg.object_count; ++k)
                    if (blend_object(objs[k]) >= 0.5) label = k + 1;

                bool occluded = false;
                if (cfg.occluder && x + 0.5 >= occ_x0 && x + 0.5 < occ_x0 + occ_w) {
                    occluded = true;
                    for (int c = 0; c < 3; ++c) px[c] = occ_color[c];
                }
                mask.at(y, x) = occluded ? 0 : label;

                for (int c = 0; c < 3; ++c) {
                    double v = px[c] + cfg.noise * noise_field[(c * cfg.height + y) *
                                                                   static_cast<std::size_t>(cfg.width) +
                                                               x];
                    v = std::clamp(v, 0.0, 1.0);
                    // Match the 8-bit quantization of the on-disk format so
                    // in-memory and loaded sequences are identical.
                    frame.at(c, y, x) = std::round(v * 255.0) / 255.0;
                }
            }
        }
        seq.frames.push_back(std::move(frame));
        seq.masks.emplace_back(std::move(mask));
    }
    return seq;
}

SyntheticConfig randomized_config(const SyntheticConfig& base, std::uint64_t seed,
                                  const std::string& id) {
    validate_config_knobs(base);
    SyntheticConfig cfg = base;
    cfg.seed = seed;
    cfg.id = id;
    InitRng rng(seed ^ 0x5eedf00dULL);
    cfg.shape = cycle_shape(base.shape, rng.uniform_int(0, 2));
    cfg.base_radius = rng.uniform_in(0.8, 1.2) * base.base_radius;
    cfg.velocity_x = rng.uniform_signed(std::abs(base.velocity_x));
    cfg.velocity_y = rng.uniform_signed(std::abs(base.velocity_y));
    if (base.scale_rate != 0.0) {
        const double mag = rng.uniform_in(0.5, 1.0) * std::abs(base.scale_rate);
        cfg.scale_rate = rng.uniform() < 0.5 ? -mag : mag;
    }

    // Shrink the motion envelope until the whole trajectory fits the frame.
    const int last = cfg.frame_count - 1;
    for (int tries = 0; tries < 64; ++tries) {
        const double grow = std::pow(1.0 + std::abs(cfg.scale_rate), last);
        const double rmax = 1.4 * cfg.base_radius * std::max(grow, 1.0);
        const double ex = std::abs(cfg.velocity_x) * last;
        const double ey = std::abs(cfg.velocity_y) * last;
        const double room_x = (cfg.width - 1.0) - 2.0 * rmax - ex;
        const double room_y = (cfg.height - 1.0) - 2.0 * rmax - ey;
        const double rmin = cfg.base_radius * std::min(1.0, std::pow(1.0 + cfg.scale_rate, last));
        if (room_x >= 2.0 && room_y >= 2.0 && rmin >= 2.0) {
            const double lo_x = rmax + (cfg.velocity_x < 0 ? ex : 0.0);
            const double lo_y = rmax + (cfg.velocity_y < 0 ? ey : 0.0);
            cfg.start_x = lo_x + rng.uniform() * room_x;
            cfg.start_y = lo_y + rng.uniform() * room_y;
            validate_config(cfg);
            return cfg;
        }
        cfg.velocity_x *= 0.8;
        cfg.velocity_y *= 0.8;
        cfg.scale_rate *= 0.9;
        cfg.base_radius = std::max(3.0, cfg.base_radius * 0.95);
    }
    throw std::invalid_argument("randomized_config: could not fit trajectory into the frame");
}

}  // namespace scaleseg
