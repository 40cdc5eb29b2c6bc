#include "scaleseg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace scaleseg {

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("shape has non-positive extent " + shape_str(shape));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

void TensorNode::ensure_grad() {
    if (grad.empty()) grad.assign(values.size(), 0.0);
}

namespace {

std::shared_ptr<TensorNode> new_node(Shape shape, std::vector<double> values) {
    auto n = std::make_shared<TensorNode>();
    n->shape = std::move(shape);
    n->values = std::move(values);
    return n;
}

void check_rank3(const Tensor& t, const char* what) {
    if (t.shape().size() != 3)
        throw std::invalid_argument(std::string(what) + ": expected rank-3 tensor, got shape " +
                                    shape_str(t.shape()));
}

void check_valid(const Tensor& t, const char* what) {
    if (!t.valid()) throw std::invalid_argument(std::string(what) + ": empty tensor");
}

bool any_requires_grad(const std::vector<Tensor>& parents) {
    for (const auto& p : parents)
        if (p.requires_grad()) return true;
    return false;
}

// Broadcast classification for binary elementwise ops.
enum class Bcast { same, a_single_channel, b_single_channel };

Bcast classify_broadcast(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() == b.shape()) return Bcast::same;
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.size() == 3 && sb.size() == 3 && sa[1] == sb[1] && sa[2] == sb[2]) {
        if (sa[0] == 1 && sb[0] > 1) return Bcast::a_single_channel;
        if (sb[0] == 1 && sa[0] > 1) return Bcast::b_single_channel;
    }
    throw std::invalid_argument(std::string(what) + ": incompatible shapes " + shape_str(sa) +
                                " and " + shape_str(sb));
}

// Maps an output index to the operand index under channel broadcasting.
struct BcastIndex {
    std::size_t plane;  // H*W, 0 when no broadcast
    std::size_t map(std::size_t i) const { return plane ? i % plane : i; }
};

Tensor binary_op(const Tensor& a, const Tensor& b, const char* what,
                 double (*fwd)(double, double),
                 void (*bwd)(double g, double av, double bv, double& da, double& db)) {
    check_valid(a, what);
    check_valid(b, what);
    Bcast bc = classify_broadcast(a, b, what);
    const Tensor& big = (bc == Bcast::a_single_channel) ? b : a;
    std::size_t plane = 0;
    if (bc != Bcast::same)
        plane = static_cast<std::size_t>(big.shape()[1]) * static_cast<std::size_t>(big.shape()[2]);
    BcastIndex ia{bc == Bcast::a_single_channel ? plane : 0};
    BcastIndex ib{bc == Bcast::b_single_channel ? plane : 0};

    std::size_t n = big.size();
    std::vector<double> out(n);
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[ia.map(i)], bv[ib.map(i)]);

    return make_op(big.shape(), std::move(out), {a, b}, [ia, ib, bwd](TensorNode& self) {
        TensorNode& pa = *self.parents[0];
        TensorNode& pb = *self.parents[1];
        for (std::size_t i = 0; i < self.size(); ++i) {
            double da = 0.0, db = 0.0;
            bwd(self.grad[i], pa.values[ia.map(i)], pb.values[ib.map(i)], da, db);
            if (pa.requires_grad) pa.grad[ia.map(i)] += da;
            if (pb.requires_grad) pb.grad[ib.map(i)] += db;
        }
    });
}

Tensor unary_op(const Tensor& x, const char* what, double (*fwd)(double),
                double (*dfdx_from_xy)(double x, double y)) {
    check_valid(x, what);
    std::vector<double> out(x.size());
    auto xv = x.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xv[i]);
    return make_op(x.shape(), std::move(out), {x}, [dfdx_from_xy](TensorNode& self) {
        TensorNode& p = *self.parents[0];
        if (!p.requires_grad) return;
        for (std::size_t i = 0; i < self.size(); ++i)
            p.grad[i] += self.grad[i] * dfdx_from_xy(p.values[i], self.values[i]);
    });
}

}  // namespace

Tensor Tensor::leaf(Shape shape, std::vector<double> values, bool requires_grad) {
    if (values.size() != numel(shape))
        throw std::invalid_argument("leaf: " + std::to_string(values.size()) +
                                    " values for shape " + shape_str(shape));
    auto n = new_node(std::move(shape), std::move(values));
    n->requires_grad = requires_grad;
    return wrap(std::move(n));
}

Tensor Tensor::full(const Shape& shape, double value) {
    return leaf(shape, std::vector<double>(numel(shape), value), false);
}

Tensor Tensor::zeros(const Shape& shape) { return full(shape, 0.0); }

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->values.size(); }
bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

std::span<const double> Tensor::values() const { return node_->values; }
std::span<double> Tensor::values_mut() { return node_->values; }
bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }
std::span<const double> Tensor::grad() const {
    if (!has_grad()) throw std::logic_error("grad(): no gradient present");
    return node_->grad;
}
void Tensor::ensure_grad() { node_->ensure_grad(); }
void Tensor::clear_grad() { node_->grad.clear(); }

double Tensor::scalar() const {
    if (size() != 1)
        throw std::invalid_argument("scalar(): tensor has shape " + shape_str(shape()));
    return node_->values[0];
}

Tensor Tensor::detached() const {
    check_valid(*this, "detached");
    return leaf(node_->shape, node_->values, false);
}

Tensor make_op(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
               std::function<void(TensorNode&)> backprop) {
    if (values.size() != numel(shape))
        throw std::invalid_argument("make_op: value count does not match shape " + shape_str(shape));
    auto n = new_node(std::move(shape), std::move(values));
    n->requires_grad = any_requires_grad(parents);
    if (n->requires_grad) {
        n->parents.reserve(parents.size());
        for (auto& p : parents) n->parents.push_back(p.node());
        n->backprop = std::move(backprop);
    }
    return Tensor::wrap(std::move(n));
}

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(a, b, "add", [](double x, double y) { return x + y; },
                     [](double g, double, double, double& da, double& db) { da = g; db = g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_op(a, b, "sub", [](double x, double y) { return x - y; },
                     [](double g, double, double, double& da, double& db) { da = g; db = -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_op(a, b, "mul", [](double x, double y) { return x * y; },
                     [](double g, double x, double y, double& da, double& db) {
                         da = g * y;
                         db = g * x;
                     });
}

Tensor exp(const Tensor& x) {
    return unary_op(x, "exp", [](double v) { return std::exp(v); },
                    [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
    check_valid(x, "log");
    for (double v : x.values())
        if (!(v > 0.0))
            throw std::domain_error("log: non-positive input " + std::to_string(v) +
                                    "; clamp probabilities first");
    return unary_op(x, "log", [](double v) { return std::log(v); },
                    [](double xv, double) { return 1.0 / xv; });
}

Tensor sigmoid(const Tensor& x) {
    return unary_op(x, "sigmoid",
                    [](double v) {
                        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
                        double e = std::exp(v);
                        return e / (1.0 + e);
                    },
                    [](double, double y) { return y * (1.0 - y); });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
    check_valid(x, "clamp");
    if (!(lo <= hi)) throw std::invalid_argument("clamp: lo > hi");
    std::vector<double> out(x.size());
    auto xv = x.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(std::max(xv[i], lo), hi);
    return make_op(x.shape(), std::move(out), {x}, [lo, hi](TensorNode& self) {
        TensorNode& p = *self.parents[0];
        if (!p.requires_grad) return;
        for (std::size_t i = 0; i < self.size(); ++i)
            if (p.values[i] >= lo && p.values[i] <= hi) p.grad[i] += self.grad[i];
    });
}

Tensor clamp_probs(const Tensor& x) { return clamp(x, kProbEps, 1.0 - kProbEps); }

Tensor softmax_channels(const Tensor& x) {
    check_valid(x, "softmax_channels");
    check_rank3(x, "softmax_channels");
    const int c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::vector<double> out(x.size());
    auto xv = x.values();
    for (std::size_t p = 0; p < plane; ++p) {
        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < c; ++k) m = std::max(m, xv[k * plane + p]);
        double s = 0.0;
        for (int k = 0; k < c; ++k) {
            double e = std::exp(xv[k * plane + p] - m);
            out[k * plane + p] = e;
            s += e;
        }
        for (int k = 0; k < c; ++k) out[k * plane + p] /= s;
    }
    return make_op(x.shape(), std::move(out), {x}, [c, plane](TensorNode& self) {
        TensorNode& p = *self.parents[0];
        if (!p.requires_grad) return;
        for (std::size_t px = 0; px < plane; ++px) {
            double dot = 0.0;
            for (int k = 0; k < c; ++k)
                dot += self.grad[k * plane + px] * self.values[k * plane + px];
            for (int k = 0; k < c; ++k) {
                std::size_t i = k * plane + px;
                p.grad[i] += self.values[i] * (self.grad[i] - dot);
            }
        }
    });
}

Tensor channel_sum(const Tensor& x) {
    check_valid(x, "channel_sum");
    check_rank3(x, "channel_sum");
    const int c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::vector<double> out(plane, 0.0);
    auto xv = x.values();
    for (int k = 0; k < c; ++k)
        for (std::size_t p = 0; p < plane; ++p) out[p] += xv[k * plane + p];
    return make_op({1, h, w}, std::move(out), {x}, [c, plane](TensorNode& self) {
        TensorNode& p = *self.parents[0];
        if (!p.requires_grad) return;
        for (int k = 0; k < c; ++k)
            for (std::size_t px = 0; px < plane; ++px) p.grad[k * plane + px] += self.grad[px];
    });
}

Tensor normalize_channels(const Tensor& x) {
    check_valid(x, "normalize_channels");
    check_rank3(x, "normalize_channels");
    const int c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    auto xv = x.values();
    std::vector<double> sums(plane, 0.0);
    for (int k = 0; k < c; ++k)
        for (std::size_t p = 0; p < plane; ++p) sums[p] += xv[k * plane + p];
    for (std::size_t p = 0; p < plane; ++p)
        if (!(sums[p] > 0.0))
            throw std::domain_error("normalize_channels: non-positive channel sum");
    std::vector<double> out(x.size());
    for (int k = 0; k < c; ++k)
        for (std::size_t p = 0; p < plane; ++p) out[k * plane + p] = xv[k * plane + p] / sums[p];
    return make_op(x.shape(), std::move(out), {x},
                   [c, plane, sums = std::move(sums)](TensorNode& self) {
                       TensorNode& p = *self.parents[0];
                       if (!p.requires_grad) return;
                       for (std::size_t px = 0; px < plane; ++px) {
                           double s = sums[px];
                           double gdotx = 0.0;
                           for (int k = 0; k < c; ++k)
                               gdotx += self.grad[k * plane + px] * p.values[k * plane + px];
                           for (int k = 0; k < c; ++k) {
                               std::size_t i = k * plane + px;
                               p.grad[i] += self.grad[i] / s - gdotx / (s * s);
                           }
                       }
                   });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    check_valid(a, "concat_channels");
    check_valid(b, "concat_channels");
    check_rank3(a, "concat_channels");
    check_rank3(b, "concat_channels");
    if (a.shape()[1] != b.shape()[1] || a.shape()[2] != b.shape()[2])
        throw std::invalid_argument("concat_channels: spatial extents differ, " +
                                    shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    const int ca = a.shape()[0], cb = b.shape()[0];
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.values().begin(), a.values().end());
    out.insert(out.end(), b.values().begin(), b.values().end());
    std::size_t na = a.size();
    return make_op({ca + cb, a.shape()[1], a.shape()[2]}, std::move(out), {a, b},
                   [na](TensorNode& self) {
                       TensorNode& pa = *self.parents[0];
                       TensorNode& pb = *self.parents[1];
                       if (pa.requires_grad)
                           for (std::size_t i = 0; i < na; ++i) pa.grad[i] += self.grad[i];
                       if (pb.requires_grad)
                           for (std::size_t i = na; i < self.size(); ++i)
                               pb.grad[i - na] += self.grad[i];
                   });
}

Tensor sum(const Tensor& x) {
    check_valid(x, "sum");
    double s = 0.0;
    for (double v : x.values()) s += v;
    return make_op({1}, {s}, {x}, [](TensorNode& self) {
        TensorNode& p = *self.parents[0];
        if (!p.requires_grad) return;
        for (std::size_t i = 0; i < p.values.size(); ++i) p.grad[i] += self.grad[0];
    });
}

Tensor mean(const Tensor& x) {
    check_valid(x, "mean");
    double s = 0.0;
    for (double v : x.values()) s += v;
    double n = static_cast<double>(x.size());
    return make_op({1}, {s / n}, {x}, [n](TensorNode& self) {
        TensorNode& p = *self.parents[0];
        if (!p.requires_grad) return;
        for (std::size_t i = 0; i < p.values.size(); ++i) p.grad[i] += self.grad[0] / n;
    });
}

Tensor stop_gradient(const Tensor& x) {
    check_valid(x, "stop_gradient");
    return Tensor::leaf(x.shape(), std::vector<double>(x.values().begin(), x.values().end()), false);
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride, int padding) {
    check_valid(input, "conv2d");
    check_valid(kernel, "conv2d");
    check_rank3(input, "conv2d input");
    if (kernel.shape().size() != 4)
        throw std::invalid_argument("conv2d: kernel must be rank-4 (oc,ic,kh,kw), got " +
                                    shape_str(kernel.shape()));
    if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
    if (padding < 0) throw std::invalid_argument("conv2d: padding must be >= 0");
    const int ic = input.shape()[0], h = input.shape()[1], w = input.shape()[2];
    const int oc = kernel.shape()[0], kic = kernel.shape()[1];
    const int kh = kernel.shape()[2], kw = kernel.shape()[3];
    if (kic != ic)
        throw std::invalid_argument("conv2d: kernel expects " + std::to_string(kic) +
                                    " input channels, input has " + std::to_string(ic));
    const int oh = (h + 2 * padding - kh) / stride + 1;
    const int ow = (w + 2 * padding - kw) / stride + 1;
    if (h + 2 * padding < kh || w + 2 * padding < kw || oh < 1 || ow < 1)
        throw std::invalid_argument("conv2d: kernel " + shape_str(kernel.shape()) +
                                    " too large for input " + shape_str(input.shape()) +
                                    " with padding " + std::to_string(padding));

    std::vector<double> out(static_cast<std::size_t>(oc) * oh * ow, 0.0);
    auto in = input.values();
    auto kv = kernel.values();
    for (int o = 0; o < oc; ++o) {
        for (int oy = 0; oy < oh; ++oy) {
            const int iy0 = oy * stride - padding;
            for (int ox = 0; ox < ow; ++ox) {
                const int ix0 = ox * stride - padding;
                double acc = 0.0;
                for (int c = 0; c < ic; ++c) {
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = iy0 + ky;
                        if (iy < 0 || iy >= h) continue;
                        const double* irow = &in[(static_cast<std::size_t>(c) * h + iy) * w];
                        const double* krow = &kv[((static_cast<std::size_t>(o) * ic + c) * kh + ky) * kw];
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ix0 + kx;
                            if (ix < 0 || ix >= w) continue;
                            acc += irow[ix] * krow[kx];
                        }
                    }
                }
                out[(static_cast<std::size_t>(o) * oh + oy) * ow + ox] = acc;
            }
        }
    }
    return make_op({oc, oh, ow}, std::move(out), {input, kernel},
                   [ic, h, w, oc, kh, kw, oh, ow, stride, padding](TensorNode& self) {
                       TensorNode& pin = *self.parents[0];
                       TensorNode& pk = *self.parents[1];
                       const bool gi = pin.requires_grad, gk = pk.requires_grad;
                       if (!gi && !gk) return;
                       for (int o = 0; o < oc; ++o) {
                           for (int oy = 0; oy < oh; ++oy) {
                               const int iy0 = oy * stride - padding;
                               for (int ox = 0; ox < ow; ++ox) {
                                   const int ix0 = ox * stride - padding;
                                   const double g =
                                       self.grad[(static_cast<std::size_t>(o) * oh + oy) * ow + ox];
                                   if (g == 0.0) continue;
                                   for (int c = 0; c < ic; ++c) {
                                       for (int ky = 0; ky < kh; ++ky) {
                                           const int iy = iy0 + ky;
                                           if (iy < 0 || iy >= h) continue;
                                           const std::size_t ibase =
                                               (static_cast<std::size_t>(c) * h + iy) * w;
                                           const std::size_t kbase =
                                               ((static_cast<std::size_t>(o) * ic + c) * kh + ky) * kw;
                                           for (int kx = 0; kx < kw; ++kx) {
                                               const int ix = ix0 + kx;
                                               if (ix < 0 || ix >= w) continue;
                                               if (gi) pin.grad[ibase + ix] += g * pk.values[kbase + kx];
                                               if (gk) pk.grad[kbase + kx] += g * pin.values[ibase + ix];
                                           }
                                       }
                                   }
                               }
                           }
                       }
                   });
}

namespace {

struct LerpAxis {
    std::vector<int> i0, i1;
    std::vector<double> t;
};

LerpAxis make_axis(int in_extent, int out_extent) {
    LerpAxis ax;
    ax.i0.resize(out_extent);
    ax.i1.resize(out_extent);
    ax.t.resize(out_extent);
    const double ratio = static_cast<double>(in_extent) / out_extent;
    for (int o = 0; o < out_extent; ++o) {
        double s = (o + 0.5) * ratio - 0.5;
        double f = std::floor(s);
        int lo = static_cast<int>(f);
        double tt = s - f;
        int hi = lo + 1;
        if (lo < 0) { lo = 0; hi = 0; }
        if (hi > in_extent - 1) hi = in_extent - 1;
        if (lo > in_extent - 1) lo = in_extent - 1;
        ax.i0[o] = lo;
        ax.i1[o] = hi;
        ax.t[o] = tt;
    }
    return ax;
}

inline double lerp(double a, double b, double t) { return a + t * (b - a); }

}  // namespace

Tensor bilinear_resize(const Tensor& input, int target_h, int target_w) {
    check_valid(input, "bilinear_resize");
    check_rank3(input, "bilinear_resize");
    if (target_h < 1 || target_w < 1)
        throw std::invalid_argument("bilinear_resize: target extent must be >= 1, got " +
                                    std::to_string(target_h) + "x" + std::to_string(target_w));
    const int c = input.shape()[0], h = input.shape()[1], w = input.shape()[2];
    LerpAxis ay = make_axis(h, target_h);
    LerpAxis axx = make_axis(w, target_w);
    std::vector<double> out(static_cast<std::size_t>(c) * target_h * target_w);
    auto in = input.values();
    for (int k = 0; k < c; ++k) {
        const std::size_t ibase = static_cast<std::size_t>(k) * h * w;
        const std::size_t obase = static_cast<std::size_t>(k) * target_h * target_w;
        for (int oy = 0; oy < target_h; ++oy) {
            const std::size_t r0 = ibase + static_cast<std::size_t>(ay.i0[oy]) * w;
            const std::size_t r1 = ibase + static_cast<std::size_t>(ay.i1[oy]) * w;
            const double ty = ay.t[oy];
            for (int ox = 0; ox < target_w; ++ox) {
                const int x0 = axx.i0[ox], x1 = axx.i1[ox];
                const double tx = axx.t[ox];
                const double top = lerp(in[r0 + x0], in[r0 + x1], tx);
                const double bot = lerp(in[r1 + x0], in[r1 + x1], tx);
                out[obase + static_cast<std::size_t>(oy) * target_w + ox] = lerp(top, bot, ty);
            }
        }
    }
    return make_op({c, target_h, target_w}, std::move(out), {input},
                   [c, h, w, target_h, target_w, ay = std::move(ay),
                    axx = std::move(axx)](TensorNode& self) {
                       TensorNode& p = *self.parents[0];
                       if (!p.requires_grad) return;
                       for (int k = 0; k < c; ++k) {
                           const std::size_t ibase = static_cast<std::size_t>(k) * h * w;
                           const std::size_t obase =
                               static_cast<std::size_t>(k) * target_h * target_w;
                           for (int oy = 0; oy < target_h; ++oy) {
                               const double ty = ay.t[oy];
                               const std::size_t r0 = ibase + static_cast<std::size_t>(ay.i0[oy]) * w;
                               const std::size_t r1 = ibase + static_cast<std::size_t>(ay.i1[oy]) * w;
                               for (int ox = 0; ox < target_w; ++ox) {
                                   const double g =
                                       self.grad[obase + static_cast<std::size_t>(oy) * target_w + ox];
                                   if (g == 0.0) continue;
                                   const int x0 = axx.i0[ox], x1 = axx.i1[ox];
                                   const double tx = axx.t[ox];
                                   p.grad[r0 + x0] += g * (1.0 - tx) * (1.0 - ty);
                                   p.grad[r0 + x1] += g * tx * (1.0 - ty);
                                   p.grad[r1 + x0] += g * (1.0 - tx) * ty;
                                   p.grad[r1 + x1] += g * tx * ty;
                               }
                           }
                       }
                   });
}

void backward(const Tensor& loss) {
    if (!loss.valid()) throw std::invalid_argument("backward: empty tensor");
    if (loss.size() != 1)
        throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                    shape_str(loss.shape()));
    TensorNode* root = loss.node().get();
    if (!root->requires_grad) return;  // loss does not depend on any parameter

    // Post-order over the requires_grad subgraph, iterative to keep deep
    // per-frame graphs off the call stack.
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> done;
    std::vector<std::pair<TensorNode*, std::size_t>> stack;
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (done.count(node)) {
            stack.pop_back();
            continue;
        }
        bool descended = false;
        while (next < node->parents.size()) {
            TensorNode* par = node->parents[next++].get();
            if (par->requires_grad && !done.count(par)) {
                stack.emplace_back(par, 0);
                descended = true;
                break;
            }
        }
        if (descended) continue;
        done.insert(node);
        order.push_back(node);
        stack.pop_back();
    }

    for (TensorNode* n : order) {
        if (!n->is_leaf()) n->grad.assign(n->size(), 0.0);
        n->ensure_grad();
    }
    root->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop(**it);
}

}  // namespace scaleseg
