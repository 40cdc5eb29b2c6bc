#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "scaleseg/tensor.hpp"

namespace scaleseg {

// Named collection of trainable tensors. The version tag records which stage
// produced the set ("init", "offline", "finetuned", "adapted").
class ParamSet {
public:
    ParamSet() = default;
    explicit ParamSet(std::string version_tag) : version_(std::move(version_tag)) {}

    void add(const std::string& name, Tensor param);
    bool has(const std::string& name) const;
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    const std::vector<std::string>& names() const { return order_; }
    std::size_t count() const { return order_.size(); }
    std::size_t total_values() const;

    const std::string& version() const { return version_; }
    void set_version(std::string v) { version_ = std::move(v); }

    // Deep copy; snapshot-then-restore is a bit-exact round trip.
    ParamSet snapshot() const;
    void restore(const ParamSet& other);

    void zero_grads();
    // value -= lr * grad for every parameter, then grads are cleared.
    // Rejects lr <= 0 and parameters whose grad was never populated.
    void sgd_step(double lr);

    void save(const std::filesystem::path& file) const;
    static ParamSet load(const std::filesystem::path& file);

private:
    std::string version_ = "init";
    std::vector<std::string> order_;
    std::unordered_map<std::string, Tensor> params_;
};

// Deterministic uniform draws mapped by hand from mt19937_64 output, so the
// same seed produces the same bytes on every platform (stdlib distribution
// objects are implementation-defined; the engine sequence is not).
class InitRng {
public:
    explicit InitRng(std::uint64_t seed);
    double uniform();                       // [0, 1)
    double uniform_signed(double limit);    // [-limit, +limit)
    double uniform_in(double lo, double hi);
    int uniform_int(int lo, int hi);        // inclusive bounds
    std::uint64_t next_seed();              // derived stream seed

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

Tensor uniform_kernel(InitRng& rng, const Shape& shape, int fan_in);

}  // namespace scaleseg
