#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "tassel/tensor.hpp"

namespace tassel {

/// One vertex of a reverse-mode computation graph.
///
/// Interior nodes hold the closure that pushes their output gradient into
/// their parents. Leaves created with `parameter()` accumulate gradients
/// across backward passes until `zero_grad()`.
template <typename Real>
struct Node {
    Tensor<Real> value;
    Tensor<Real> grad;  // empty until first accumulation
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;
    bool requires_grad = false;

    /// Gradient buffer, allocated as zeros on first use.
    Tensor<Real>& grad_ref() {
        if (grad.empty()) grad = Tensor<Real>::zeros(value.shape());
        return grad;
    }

    void accumulate(std::span<const Real> g) {
        auto& buf = grad_ref();
        auto dst = buf.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    }

    bool has_grad() const noexcept { return !grad.empty(); }
};

/// Handle to a graph node. Copies share the node.
template <typename Real>
class Var {
public:
    using node_type = Node<Real>;

    Var() = default;
    explicit Var(std::shared_ptr<node_type> n) : node_(std::move(n)) {}

    const Tensor<Real>& value() const { return node_->value; }
    Tensor<Real>& mutable_value() { return node_->value; }
    const Shape& shape() const { return node_->value.shape(); }
    std::int64_t dim(std::size_t i) const { return node_->value.dim(i); }
    bool requires_grad() const { return node_ && node_->requires_grad; }

    /// Accumulated gradient; zeros if nothing flowed into this node.
    const Tensor<Real>& grad() const { return node_->grad_ref(); }
    void zero_grad() { node_->grad = Tensor<Real>(); }

    node_type* node() const { return node_.get(); }
    const std::shared_ptr<node_type>& shared() const { return node_; }
    explicit operator bool() const { return static_cast<bool>(node_); }

private:
    std::shared_ptr<node_type> node_;
};

template <typename Real>
Var<Real> parameter(Tensor<Real> value) {
    auto n = std::make_shared<Node<Real>>();
    n->value = std::move(value);
    n->requires_grad = true;
    return Var<Real>(std::move(n));
}

template <typename Real>
Var<Real> constant(Tensor<Real> value) {
    auto n = std::make_shared<Node<Real>>();
    n->value = std::move(value);
    return Var<Real>(std::move(n));
}

/// Creates the output node of an operation. The closure is kept only when
/// some input requires a gradient, so pure inference builds no tape.
template <typename Real>
Var<Real> make_result(Tensor<Real> value, std::vector<Var<Real>> inputs, std::function<void(Node<Real>&)> fn) {
    auto n = std::make_shared<Node<Real>>();
    n->value = std::move(value);
    for (const auto& in : inputs)
        if (in.requires_grad()) n->requires_grad = true;
    if (n->requires_grad) {
        n->parents.reserve(inputs.size());
        for (auto& in : inputs) n->parents.push_back(in.shared());
        n->backward_fn = std::move(fn);
    }
    return Var<Real>(std::move(n));
}

/// Runs reverse-mode differentiation from a scalar loss. Each reachable node
/// is visited exactly once, in reverse topological order.
template <typename Real>
void backward(const Var<Real>& loss);

extern template void backward<float>(const Var<float>&);
extern template void backward<double>(const Var<double>&);

}  // namespace tassel
