#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "lite/errors.hpp"
#include "lite/numcore/tensor.hpp"

namespace lite {

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

// Reverse-mode autodiff tape. One tape is built per forward pass and thrown
// away afterwards. `S` is the working precision: float for training and
// inference, double for gradient checking.
//
// A tape constructed with record=false keeps values only; no gradient
// buffers or backward closures are created.
template <typename S>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var self)>;

  struct Node {
    Shape shape;
    std::vector<S> value;
    std::vector<S> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  explicit Tape(bool record = true) : record_(record) {}

  bool recording() const { return record_; }

  Var constant(Shape shape, std::vector<S> value) {
    return push(std::move(shape), std::move(value), false, {});
  }

  Var constant(const Tensor& t) { return leaf(t, false); }

  // Leaf converted from a float tensor. With requires_grad the leaf's
  // gradient is available after backward() through grad().
  Var leaf(const Tensor& t, bool requires_grad) {
    return push(t.shape, std::vector<S>(t.data.begin(), t.data.end()), requires_grad, {});
  }

  Var leaf(Shape shape, std::vector<S> value, bool requires_grad) {
    return push(std::move(shape), std::move(value), requires_grad, {});
  }

  // Records an op result. Nodes that do not require grad are skipped by
  // backward().
  Var push(Shape shape, std::vector<S> value, bool requires_grad, BackwardFn backward) {
    if (shape_numel(shape) != value.size()) {
      throw DimensionError("tape value " + shape_str(shape) + " has " +
                           std::to_string(value.size()) + " elements");
    }
    Node node;
    node.shape = std::move(shape);
    node.value = std::move(value);
    node.requires_grad = record_ && requires_grad;
    if (node.requires_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var{nodes_.size() - 1};
  }

  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  const Shape& shape(Var v) const { return nodes_[v.id].shape; }
  std::span<const S> value(Var v) const { return nodes_[v.id].value; }
  S scalar(Var v) const {
    if (nodes_[v.id].value.size() != 1) throw DimensionError("value is not a scalar");
    return nodes_[v.id].value[0];
  }

  // Gradient buffer; empty unless the node requires grad and backward ran.
  std::span<S> grad(Var v) { return nodes_[v.id].grad; }
  std::span<const S> grad(Var v) const { return nodes_[v.id].grad; }

  std::size_t size() const { return nodes_.size(); }

  // Drops every node recorded after the first n, so one tape holding bound
  // parameters can be reused across value-only passes.
  void truncate(std::size_t n) {
    if (n < nodes_.size()) nodes_.resize(n);
  }

  void backward(Var loss) {
    if (!record_) throw Error("backward on a tape that was not recording");
    if (nodes_[loss.id].value.size() != 1) throw DimensionError("backward needs a scalar loss");
    for (auto& node : nodes_) {
      if (node.requires_grad) node.grad.assign(node.value.size(), S(0));
    }
    if (!nodes_[loss.id].requires_grad) return;
    nodes_[loss.id].grad[0] = S(1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      if (nodes_[i].backward && !nodes_[i].grad.empty()) nodes_[i].backward(*this, Var{i});
    }
  }

  // Adds the leaf gradient into `target.grad` (allocated if missing).
  void accumulate_grad_into(Var leaf_var, Tensor& target) const {
    const auto& g = nodes_[leaf_var.id].grad;
    if (!target.grad) target.zero_grad();
    if (g.empty()) return;
    auto& dst = *target.grad;
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += static_cast<float>(g[i]);
  }

 private:
  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace lite
