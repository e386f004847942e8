#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "landseg/error.hpp"
#include "landseg/tensor.hpp"

namespace landseg::nn {

/// Named trainable tensor with its accumulated gradient.
template <typename T>
struct Parameter {
  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;
  /// Set when the last backward pass reached this parameter.
  bool touched = false;
  /// Multiplier on weight decay (0 for norms and bias tables).
  double decay_mult = 1.0;
};

/// Ordered parameter collection; insertion order is the canonical order.
template <typename T>
class ParamStore {
 public:
  Parameter<T>& add(std::string name, BasicTensor<T> value, double decay_mult = 1.0) {
    if (index_.count(name)) throw UsageError("duplicate parameter '" + name + "'");
    index_.emplace(name, params_.size());
    BasicTensor<T> grad(value.shape(), T(0));
    params_.push_back(Parameter<T>{std::move(name), std::move(value), std::move(grad), false, decay_mult});
    return params_.back();
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Parameter<T>& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("unknown parameter '" + name + "'");
    return params_[it->second];
  }
  const Parameter<T>& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("unknown parameter '" + name + "'");
    return params_[it->second];
  }

  std::deque<Parameter<T>>& all() { return params_; }
  const std::deque<Parameter<T>>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) {
      p.grad.fill(T(0));
      p.touched = false;
    }
  }

 private:
  std::deque<Parameter<T>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode recording of a forward computation. Each op pushes its output
/// with a closure that maps the output gradient onto its inputs.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var self)>;

  explicit Tape(bool record = true) : record_(record) {}

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(BasicTensor<T> value) { return push(std::move(value), false, {}); }

  /// Constant that refers to `value` without copying; it must outlive the tape.
  Var borrow(const BasicTensor<T>& value) {
    Var v = push({}, false, {});
    nodes_[v.id].ref = &value;
    return v;
  }

  /// Leaf bound to a parameter; gradients flow into `param.grad` on backward.
  /// The parameter value is referenced, not copied.
  Var parameter(Parameter<T>& param) {
    Var v = push({}, record_, {});
    nodes_[v.id].ref = &param.value;
    nodes_[v.id].param = &param;
    return v;
  }

  const BasicTensor<T>& value(Var v) const { return node(v).get(); }
  const Shape& shape(Var v) const { return node(v).get().shape(); }
  bool requires_grad(Var v) const { return node(v).needs_grad; }

  /// Gradient of a node, empty before backward reached it.
  const BasicTensor<T>& grad(Var v) const { return node(v).grad; }

  /// Gradient buffer of an input, allocated on first use. Only valid for
  /// nodes with requires_grad.
  BasicTensor<T>& grad_buffer(Var v) {
    Node& n = node(v);
    if (n.grad.empty()) n.grad = BasicTensor<T>(n.get().shape(), T(0));
    return n.grad;
  }

  /// Records an op output. `fn` runs only if some input requires a gradient.
  Var push_op(BasicTensor<T> value, std::initializer_list<Var> inputs, BackwardFn fn) {
    bool needs = false;
    if (record_) {
      for (Var in : inputs) needs = needs || node(in).needs_grad;
    }
    return push(std::move(value), needs, needs ? std::move(fn) : BackwardFn{});
  }
  Var push_op(BasicTensor<T> value, const std::vector<Var>& inputs, BackwardFn fn) {
    bool needs = false;
    if (record_) {
      for (Var in : inputs) needs = needs || node(in).needs_grad;
    }
    return push(std::move(value), needs, needs ? std::move(fn) : BackwardFn{});
  }

  /// Backpropagates from a scalar output with seed 1.
  void backward(Var out) {
    if (!out.valid() || out.id >= static_cast<int>(nodes_.size())) {
      throw UsageError("backward called before a forward pass");
    }
    if (node(out).get().size() != 1) throw UsageError("backward(Var) needs a scalar output");
    backward(out, BasicTensor<T>(node(out).get().shape(), T(1)));
  }

  void backward(Var out, BasicTensor<T> seed) {
    if (!record_) throw UsageError("backward on a tape that did not record the forward pass");
    if (!out.valid() || out.id >= static_cast<int>(nodes_.size())) {
      throw UsageError("backward called before a forward pass");
    }
    if (seed.shape() != node(out).get().shape()) throw UsageError("backward seed shape mismatch");
    for (auto& n : nodes_) n.grad = BasicTensor<T>();
    node(out).grad = std::move(seed);
    for (int id = out.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.needs_grad || n.grad.empty()) continue;
      if (n.backward) n.backward(*this, Var{id});
      if (n.param) {
        auto& dst = n.param->grad.storage();
        const auto& src = nodes_[id].grad.storage();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        n.param->touched = true;
      }
    }
  }

 private:
  struct Node {
    BasicTensor<T> value;
    BasicTensor<T> grad;
    BackwardFn backward;
    Parameter<T>* param = nullptr;
    bool needs_grad = false;
    const BasicTensor<T>* ref = nullptr;

    const BasicTensor<T>& get() const { return ref ? *ref : value; }
  };

  Var push(BasicTensor<T> value, bool needs_grad, BackwardFn fn) {
    nodes_.push_back(Node{std::move(value), {}, std::move(fn), nullptr, needs_grad, nullptr});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  Node& node(Var v) {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) throw UsageError("invalid tape variable");
    return nodes_[v.id];
  }
  const Node& node(Var v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) throw UsageError("invalid tape variable");
    return nodes_[v.id];
  }

  std::vector<Node> nodes_;
  bool record_;
};

/// Binds parameters of a store onto a tape, once per parameter. A binder over
/// a const store records parameters as constants (inference only).
template <typename T>
class ParamBinder {
 public:
  ParamBinder(Tape<T>& tape, ParamStore<T>& store) : tape_(tape), store_(&store), const_store_(&store) {}
  ParamBinder(Tape<T>& tape, const ParamStore<T>& store) : tape_(tape), const_store_(&store) {}

  Var operator()(const std::string& name) {
    auto it = bound_.find(name);
    if (it != bound_.end()) return it->second;
    Var v = store_ ? tape_.parameter(store_->get(name)) : tape_.borrow(const_store_->get(name).value);
    bound_.emplace(name, v);
    return v;
  }

  Tape<T>& tape() { return tape_; }

 private:
  Tape<T>& tape_;
  ParamStore<T>* store_ = nullptr;
  const ParamStore<T>* const_store_ = nullptr;
  std::unordered_map<std::string, Var> bound_;
};

}  // namespace landseg::nn
