#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nesc/tensor.h"

namespace nesc {

/// A named trainable array with its most recent gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Ordered collection of parameters. Element addresses are stable, so tapes
/// may hold pointers to them while the set is alive.
class ParameterSet {
 public:
  Parameter& add(std::string name, Tensor value);
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();

  friend bool operator==(const ParameterSet& a, const ParameterSet& b);

 private:
  std::deque<Parameter> params_;
};

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Tensor& grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records primitive operations for reverse-mode differentiation. Nodes are
/// appended in evaluation order, which is a topological order, so backward
/// simply walks the record in reverse. Confined to a single thread.
class Tape {
 public:
  // Receives the tape and the id of the node being differentiated; reads
  // node_value/node_grad and accumulates into the inputs' grads.
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // One leaf per parameter per tape; later calls return the same Var.
  Var parameter(const Parameter& p);
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);

  // Resets every gradient, then propagates d(loss)/d(node) to all nodes.
  void backward(Var loss);

  // Gradient of the last backward pass with respect to p; zero when p did
  // not take part in the computation.
  Tensor gradient_of(const Parameter& p) const;
  // Copies gradients into every parameter's grad field.
  void collect_gradients(ParameterSet& params) const;

  std::size_t size() const { return nodes_.size(); }
  const Tensor& node_value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& node_grad(std::size_t id) const { return nodes_[id].grad; }
  Tensor& node_grad(std::size_t id) { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  bool has_backward_ = false;
};

// Differentiable primitives. Every operand must live on the same tape.
Var affine(Var weight, Var x, Var bias);
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var sigmoid(Var a);
Var tanh(Var a);
Var softmax(Var a);
Var log_softmax(Var a);
Var log_sum_exp(Var a);
Var sum(Var a);
Var dot(Var a, Var b);
Var pick(Var a, std::size_t index);
Var concat(const std::vector<Var>& parts);
Var slice(Var a, std::size_t offset, std::size_t length);
// Stacks equally sized vectors into a [count x width] matrix.
Var stack(const std::vector<Var>& rows);
Var row(Var matrix, std::size_t r);

struct LstmState {
  Var h;
  Var c;
};

// Gate layout inside weight/bias rows: input, forget, candidate, output.
// weight is [4H x (d + H)] acting on [x | h_prev]; bias is [4H].
LstmState lstm_cell(Var x, Var h_prev, Var c_prev, Var weight, Var bias);

}  // namespace nesc
