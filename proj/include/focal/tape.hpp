#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "focal/tensor.hpp"

namespace focal::nd {

// Reverse-mode autodiff tape. Nodes are created in topological order
// (ops only reference earlier nodes), so backward() is a reverse sweep
// over creation order. Gradients accumulate by summation, so a node used
// by several consumers receives the sum of their contributions.
//
// A tape is single-threaded; independent tapes may run concurrently.
class Tape {
public:
    using NodeId = std::int32_t;

    NodeId leaf(Tensor value);

    const Tensor& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    const Tensor& grad(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
    std::size_t size() const { return nodes_.size(); }

    // Seeds the (scalar) root with gradient 1 and sweeps backwards.
    void backward(NodeId root);

    // --- primitive ops -----------------------------------------------------
    NodeId matmul(NodeId a, NodeId b);              // {m,k} x {k,n} -> {m,n}
    NodeId add(NodeId a, NodeId b);                 // same shape
    NodeId sub(NodeId a, NodeId b);                 // same shape
    NodeId mul(NodeId a, NodeId b);                 // elementwise, same shape
    NodeId scale(NodeId a, double c);
    NodeId add_rowvec(NodeId a, NodeId bias);       // {m,n} + {n}, broadcast over rows
    NodeId relu(NodeId a);
    NodeId softplus(NodeId a);                      // ln(1+e^x), stable
    NodeId log(NodeId a);                           // entries must be > 0
    NodeId softmax(NodeId a);                       // {C} or rowwise on {m,C}, max-shifted
    NodeId cross_entropy(NodeId p, NodeId y);       // -sum y ln(max(p,1e-12)), scalar
    NodeId sum(NodeId a);                           // scalar
    NodeId mean(NodeId a);                          // scalar
    NodeId row(NodeId a, std::size_t i);            // {m,n} -> {1,n}
    NodeId reshape(NodeId a, std::vector<std::size_t> shape);
    NodeId conv2d(NodeId x, NodeId w, NodeId b);    // {N,H,W} * {F,kh,kw} + {F} -> {N,F,H-kh+1,W-kw+1}
    NodeId maxpool2(NodeId x);                      // {N,F,H,W} -> {N,F,H/2,W/2}

    static constexpr double kCrossEntropyEps = 1e-12;

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&)> back; // null for leaves
    };

    NodeId push(Tensor value, std::function<void(Tape&)> back);
    Tensor& grad_mut(NodeId id) { return nodes_[static_cast<std::size_t>(id)].grad; }

    std::vector<Node> nodes_;
};

// Compares tape gradients of a scalar-valued function against central
// finite differences (step h) and returns the worst relative error,
// where rel(a, n) = |a - n| / max(|a|, |n|, 1).
double grad_check(const std::function<Tape::NodeId(Tape&, Tape::NodeId)>& f,
                  const Tensor& theta, double h = 1e-5);

} // namespace focal::nd
