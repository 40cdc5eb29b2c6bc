#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace scaleseg {

// Shape extents. Rank-3 tensors are (channels, height, width) in row-major
// order; conv kernels are rank-4 (out_ch, in_ch, kh, kw); scalars are {1}.
using Shape = std::vector<int>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Probabilities are clamped to [kProbEps, 1 - kProbEps] before any log.
inline constexpr double kProbEps = 1e-7;

// One vertex of a computation graph. Values are computed eagerly when the
// op is built; `backprop` accumulates d(output)/d(parents) into the parents'
// grad buffers when the graph is walked in reverse.
struct TensorNode {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until ensure_grad()
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backprop;

    std::size_t size() const { return values.size(); }
    bool is_leaf() const { return !backprop; }
    void ensure_grad();
};

// Value-semantics handle on a graph node. Copying a Tensor aliases the node;
// detached() makes an independent leaf with the same values.
class Tensor {
public:
    Tensor() = default;

    static Tensor leaf(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor full(const Shape& shape, double value);
    static Tensor zeros(const Shape& shape);

    bool valid() const { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t size() const;
    bool requires_grad() const;

    std::span<const double> values() const;
    std::span<double> values_mut();
    bool has_grad() const;
    std::span<const double> grad() const;
    void ensure_grad();
    void clear_grad();

    double scalar() const;           // value of a size-1 tensor
    Tensor detached() const;         // leaf copy, no gradient tracking

    const std::shared_ptr<TensorNode>& node() const { return node_; }
    static Tensor wrap(std::shared_ptr<TensorNode> n) { Tensor t; t.node_ = std::move(n); return t; }

private:
    std::shared_ptr<TensorNode> node_;
};

// Builder for ops defined outside this module (e.g. fused loss kernels).
// `backprop` must check parents' requires_grad before touching their grads.
Tensor make_op(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
               std::function<void(TensorNode&)> backprop);

// Elementwise suite. add/sub/mul accept equal shapes, or rank-3 operands
// that differ only in a singleton channel extent (broadcast over channels).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);  // rejects values <= 0; clamp first
Tensor sigmoid(const Tensor& x);
Tensor clamp(const Tensor& x, double lo, double hi);
Tensor clamp_probs(const Tensor& x);  // clamp(x, kProbEps, 1 - kProbEps)

// Channel-dimension ops on rank-3 tensors.
Tensor softmax_channels(const Tensor& x);
Tensor channel_sum(const Tensor& x);         // (C,H,W) -> (1,H,W)
Tensor normalize_channels(const Tensor& x);  // x / channel_sum(x), sums must be > 0
Tensor concat_channels(const Tensor& a, const Tensor& b);

// Reductions to a {1}-shaped scalar.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Passes values through, blocks gradient (returns an untracked leaf).
Tensor stop_gradient(const Tensor& x);

// Cross-correlation with zero padding. input (IC,H,W), kernel (OC,IC,KH,KW).
Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride, int padding);

// Bilinear interpolation with half-pixel-center alignment and edge clamping.
// Resizing to the same extent is an exact identity; constant maps stay
// exactly constant (interpolation is evaluated in lerp form).
Tensor bilinear_resize(const Tensor& input, int target_h, int target_w);

// Reverse accumulation from a scalar loss. Interior grads are reset on every
// call; leaf (parameter) grads accumulate across calls until cleared.
void backward(const Tensor& loss);

}  // namespace scaleseg
