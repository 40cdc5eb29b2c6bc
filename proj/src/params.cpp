#include "scaleseg/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "scaleseg/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

namespace scaleseg {

void ParamSet::add(const std::string& name, Tensor param) {
    if (name.empty()) throw std::invalid_argument("ParamSet::add: empty name");
    if (params_.count(name))
        throw std::invalid_argument("ParamSet::add: duplicate parameter name '" + name + "'");
    if (!param.valid()) throw std::invalid_argument("ParamSet::add: empty tensor for '" + name + "'");
    order_.push_back(name);
    params_.emplace(name, std::move(param));
}

bool ParamSet::has(const std::string& name) const { return params_.count(name) > 0; }

Tensor& ParamSet::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end())
        throw std::invalid_argument("ParamSet: unknown parameter '" + name + "'");
    return it->second;
}

const Tensor& ParamSet::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end())
        throw std::invalid_argument("ParamSet: unknown parameter '" + name + "'");
    return it->second;
}

std::size_t ParamSet::total_values() const {
    std::size_t n = 0;
    for (const auto& name : order_) n += params_.at(name).size();
    return n;
}

ParamSet ParamSet::snapshot() const {
    ParamSet copy(version_);
    for (const auto& name : order_) {
        const Tensor& t = params_.at(name);
        copy.add(name, Tensor::leaf(t.shape(),
                                    std::vector<double>(t.values().begin(), t.values().end()),
                                    true));
    }
    return copy;
}

void ParamSet::restore(const ParamSet& other) {
    if (other.order_ != order_)
        throw std::invalid_argument("ParamSet::restore: parameter names differ");
    for (const auto& name : order_) {
        Tensor& dst = params_.at(name);
        const Tensor& src = other.params_.at(name);
        if (dst.shape() != src.shape())
            throw std::invalid_argument("ParamSet::restore: shape mismatch for '" + name + "'");
        auto d = dst.values_mut();
        auto s = src.values();
        std::copy(s.begin(), s.end(), d.begin());
        dst.clear_grad();
    }
    version_ = other.version_;
}

void ParamSet::zero_grads() {
    for (const auto& name : order_) {
        Tensor& t = params_.at(name);
        t.clear_grad();
        t.ensure_grad();
    }
}

void ParamSet::sgd_step(double lr) {
    if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: learning rate must be positive");
    for (const auto& name : order_)
        if (!params_.at(name).has_grad())
            throw std::invalid_argument("sgd_step: parameter '" + name + "' has no gradient");
    for (const auto& name : order_) {
        Tensor& t = params_.at(name);
        auto v = t.values_mut();
        auto g = t.grad();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
        t.clear_grad();
    }
}

namespace {

constexpr char kMagic[8] = {'S', 'S', 'E', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::ofstream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::ifstream& is, const std::string& file) {
    std::uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
        throw IoError("checkpoint truncated: " + file);
    return v;
}

std::string get_string(std::ifstream& is, const std::string& file) {
    std::uint32_t len = get_u32(is, file);
    if (len > (1u << 20)) throw IoError("checkpoint corrupt (oversized string): " + file);
    std::string s(len, '\0');
    if (len && !is.read(s.data(), len)) throw IoError("checkpoint truncated: " + file);
    return s;
}

}  // namespace

void ParamSet::save(const std::filesystem::path& file) const {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint for writing: " + file.string());
    os.write(kMagic, sizeof kMagic);
    put_u32(os, kFormatVersion);
    put_u32(os, static_cast<std::uint32_t>(version_.size()));
    os.write(version_.data(), static_cast<std::streamsize>(version_.size()));
    put_u32(os, static_cast<std::uint32_t>(order_.size()));
    for (const auto& name : order_) {
        const Tensor& t = params_.at(name);
        put_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(os, static_cast<std::uint32_t>(t.shape().size()));
        for (int d : t.shape()) put_u32(os, static_cast<std::uint32_t>(d));
        os.write(reinterpret_cast<const char*>(t.values().data()),
                 static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!os) throw IoError("failed writing checkpoint: " + file.string());
}

ParamSet ParamSet::load(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + file.string());
    char magic[8] = {};
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw IoError("not a checkpoint file (bad magic): " + file.string());
    std::uint32_t fmt = get_u32(is, file.string());
    if (fmt != kFormatVersion)
        throw IoError("checkpoint format version mismatch (got " + std::to_string(fmt) +
                      ", expected " + std::to_string(kFormatVersion) + "): " + file.string());
    ParamSet set(get_string(is, file.string()));
    std::uint32_t count = get_u32(is, file.string());
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = get_string(is, file.string());
        std::uint32_t rank = get_u32(is, file.string());
        if (rank == 0 || rank > 8) throw IoError("checkpoint corrupt (bad rank): " + file.string());
        Shape shape(rank);
        for (auto& d : shape) d = static_cast<int>(get_u32(is, file.string()));
        std::vector<double> values(numel(shape));
        if (!is.read(reinterpret_cast<char*>(values.data()),
                     static_cast<std::streamsize>(values.size() * sizeof(double))))
            throw IoError("checkpoint truncated: " + file.string());
        set.add(name, Tensor::leaf(std::move(shape), std::move(values), true));
    }
    return set;
}

struct InitRng::Impl {
    std::mt19937_64 eng;
    explicit Impl(std::uint64_t seed) : eng(seed) {}
};

InitRng::InitRng(std::uint64_t seed) : impl_(std::make_shared<Impl>(seed)) {}

double InitRng::uniform() {
    return static_cast<double>(impl_->eng() >> 11) * 0x1.0p-53;
}

double InitRng::uniform_signed(double limit) { return (2.0 * uniform() - 1.0) * limit; }

double InitRng::uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int InitRng::uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(impl_->eng() % span);
}

std::uint64_t InitRng::next_seed() { return impl_->eng(); }

Tensor uniform_kernel(InitRng& rng, const Shape& shape, int fan_in) {
    if (fan_in <= 0) throw std::invalid_argument("uniform_kernel: fan_in must be positive");
    // Uniform fan-in scaling with unit output variance: U(-a, a) has
    // variance a^2/3, so a = sqrt(3/fan_in).
    const double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
    std::vector<double> values(numel(shape));
    for (auto& v : values) v = rng.uniform_signed(limit);
    return Tensor::leaf(shape, std::move(values), true);
}

}  // namespace scaleseg
