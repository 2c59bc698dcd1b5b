#include "nesc/autodiff.h"

#include <algorithm>
#include <cmath>

#include "nesc/errors.h"
#include "nesc/ops.h"

namespace nesc {

// ---------------------------------------------------------------------------
// ParameterSet

Parameter& ParameterSet::add(std::string name, Tensor value) {
  if (contains(name)) throw UsageError("duplicate parameter '" + name + "'");
  Tensor grad(value.shape());
  params_.push_back(Parameter{std::move(name), std::move(value), std::move(grad)});
  return params_.back();
}

Parameter& ParameterSet::get(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw UsageError("unknown parameter '" + std::string(name) + "'");
}

const Parameter& ParameterSet::get(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->get(name);
}

bool ParameterSet::contains(std::string_view name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const Parameter& p) { return p.name == name; });
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  if (a.size() != b.size()) return false;
  auto it = b.begin();
  for (const auto& p : a) {
    if (p.name != it->name || p.value != it->value) return false;
    ++it;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Tape

const Tensor& Var::value() const { return tape_->node_value(id_); }
const Tensor& Var::grad() const { return tape_->node_grad(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(const Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  nodes_.push_back(Node{p.value, {}, {}, {}, true});
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
  bool needs = std::any_of(inputs.begin(), inputs.end(), [&](std::size_t i) {
    return nodes_[i].requires_grad;
  });
  nodes_.push_back(Node{std::move(value), {}, std::move(inputs),
                        needs ? std::move(fn) : BackwardFn{}, needs});
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw UsageError("backward: loss is on another tape");
  if (node_value(loss.id()).size() != 1) {
    throw UsageError("backward: loss must be a scalar, got shape " +
                     shape_string(node_value(loss.id()).shape()));
  }
  for (auto& node : nodes_) {
    if (node.grad.shape() != node.value.shape()) {
      node.grad = Tensor(node.value.shape());
    } else {
      node.grad.fill(0.0);
    }
  }
  nodes_[loss.id()].grad[0] = 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    if (nodes_[id].backward) nodes_[id].backward(*this, id);
  }
  has_backward_ = true;
}

Tensor Tape::gradient_of(const Parameter& p) const {
  auto it = param_nodes_.find(&p);
  if (!has_backward_ || it == param_nodes_.end()) return Tensor(p.value.shape());
  return nodes_[it->second].grad;
}

void Tape::collect_gradients(ParameterSet& params) const {
  for (auto& p : params) p.grad = gradient_of(p);
}

// ---------------------------------------------------------------------------
// Primitives

namespace {

void same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) {
    throw UsageError(std::string(op) + ": operands on different tapes");
  }
}

// Applies a unary elementwise op whose derivative is expressed through the
// input x and output y.
template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  Tensor out = a.value();
  for (auto& v : out.values()) v = fwd(v);
  std::size_t in = a.id();
  return a.tape().record(std::move(out), {in}, [in, deriv](Tape& t, std::size_t self) {
    const auto& x = t.node_value(in);
    const auto& y = t.node_value(self);
    const auto& gy = t.node_grad(self);
    auto& gx = t.node_grad(in);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * deriv(x[i], y[i]);
  });
}

}  // namespace

Var affine(Var weight, Var x, Var bias) {
  same_tape(weight, x, "affine");
  same_tape(weight, bias, "affine");
  Tensor y = affine(weight.value(), x.value(), bias.value());
  std::size_t w = weight.id(), xi = x.id(), b = bias.id();
  return weight.tape().record(std::move(y), {w, xi, b}, [w, xi, b](Tape& t, std::size_t self) {
    const auto& W = t.node_value(w);
    const auto& xv = t.node_value(xi);
    const auto& gy = t.node_grad(self);
    const std::size_t m = W.rows(), n = W.cols();
    if (t.requires_grad(w)) {
      auto& gW = t.node_grad(w);
      for (std::size_t r = 0; r < m; ++r) {
        const double g = gy[r];
        if (g == 0.0) continue;
        double* dst = gW.data().data() + r * n;
        for (std::size_t c = 0; c < n; ++c) dst[c] += g * xv[c];
      }
    }
    if (t.requires_grad(xi)) {
      auto& gx = t.node_grad(xi);
      for (std::size_t r = 0; r < m; ++r) {
        const double g = gy[r];
        if (g == 0.0) continue;
        const double* src = W.data().data() + r * n;
        for (std::size_t c = 0; c < n; ++c) gx[c] += g * src[c];
      }
    }
    if (t.requires_grad(b)) {
      auto& gb = t.node_grad(b);
      for (std::size_t r = 0; r < m; ++r) gb[r] += gy[r];
    }
  });
}

Var add(Var a, Var b) {
  same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(std::move(out), {ai, bi}, [ai, bi](Tape& t, std::size_t self) {
    const auto& gy = t.node_grad(self);
    for (std::size_t id : {ai, bi}) {
      auto& g = t.node_grad(id);
      for (std::size_t i = 0; i < gy.size(); ++i) g[i] += gy[i];
    }
  });
}

Var mul(Var a, Var b) {
  same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  std::size_t ai = a.id(), bi = b.id();
  return a.tape().record(std::move(out), {ai, bi}, [ai, bi](Tape& t, std::size_t self) {
    const auto& gy = t.node_grad(self);
    const auto& av = t.node_value(ai);
    const auto& bv = t.node_value(bi);
    auto& ga = t.node_grad(ai);
    for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * bv[i];
    auto& gb = t.node_grad(bi);
    for (std::size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i] * av[i];
  });
}

Var scale(Var a, double factor) {
  return unary(
      a, [factor](double x) { return x * factor; },
      [factor](double, double) { return factor; });
}

Var sigmoid(Var a) {
  return unary(
      a, [](double x) { return sigmoid(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var softmax(Var a) {
  Tensor out = softmax(a.value());
  std::size_t in = a.id();
  return a.tape().record(std::move(out), {in}, [in](Tape& t, std::size_t self) {
    const auto& y = t.node_value(self);
    const auto& gy = t.node_grad(self);
    double inner = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) inner += gy[i] * y[i];
    auto& gx = t.node_grad(in);
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] += y[i] * (gy[i] - inner);
  });
}

Var log_softmax(Var a) {
  Tensor out = log_softmax(a.value());
  std::size_t in = a.id();
  return a.tape().record(std::move(out), {in}, [in](Tape& t, std::size_t self) {
    const auto& y = t.node_value(self);
    const auto& gy = t.node_grad(self);
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) total += gy[i];
    auto& gx = t.node_grad(in);
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] += gy[i] - std::exp(y[i]) * total;
  });
}

Var log_sum_exp(Var a) {
  Tensor out = Tensor::scalar(log_sum_exp(a.value().data()));
  std::size_t in = a.id();
  return a.tape().record(std::move(out), {in}, [in](Tape& t, std::size_t self) {
    const auto& x = t.node_value(in);
    const double lse = t.node_value(self)[0];
    const double g = t.node_grad(self)[0];
    auto& gx = t.node_grad(in);
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += g * std::exp(x[i] - lse);
  });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  std::size_t in = a.id();
  return a.tape().record(Tensor::scalar(total), {in}, [in](Tape& t, std::size_t self) {
    const double g = t.node_grad(self)[0];
    for (auto& v : t.node_grad(in).values()) v += g;
  });
}

Var dot(Var a, Var b) { return sum(mul(a, b)); }

Var pick(Var a, std::size_t index) {
  if (index >= a.value().size()) {
    throw DimensionError("pick: index " + std::to_string(index) +
                         " out of range for shape " +
                         shape_string(a.value().shape()));
  }
  std::size_t in = a.id();
  return a.tape().record(Tensor::scalar(a.value()[index]), {in},
                         [in, index](Tape& t, std::size_t self) {
                           t.node_grad(in)[index] += t.node_grad(self)[0];
                         });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat: no operands");
  std::vector<double> data;
  std::vector<std::size_t> ids;
  for (const auto& p : parts) {
    same_tape(parts.front(), p, "concat");
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
    ids.push_back(p.id());
  }
  Tape& tape = parts.front().tape();
  return tape.record(Tensor::vector(std::move(data)), ids, [ids](Tape& t, std::size_t self) {
    const auto& gy = t.node_grad(self);
    std::size_t offset = 0;
    for (std::size_t id : ids) {
      auto& g = t.node_grad(id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[offset + i];
      offset += g.size();
    }
  });
}

Var slice(Var a, std::size_t offset, std::size_t length) {
  const auto& v = a.value();
  if (offset + length > v.size() || length == 0) {
    throw DimensionError("slice: [" + std::to_string(offset) + ", " +
                         std::to_string(offset + length) +
                         ") out of range for shape " + shape_string(v.shape()));
  }
  std::vector<double> data(v.data().begin() + offset,
                           v.data().begin() + offset + length);
  std::size_t in = a.id();
  return a.tape().record(Tensor::vector(std::move(data)), {in},
                         [in, offset](Tape& t, std::size_t self) {
                           const auto& gy = t.node_grad(self);
                           auto& gx = t.node_grad(in);
                           for (std::size_t i = 0; i < gy.size(); ++i) gx[offset + i] += gy[i];
                         });
}

Var stack(const std::vector<Var>& rows) {
  if (rows.empty()) throw DimensionError("stack: no rows");
  const std::size_t width = rows.front().value().size();
  std::vector<double> data;
  std::vector<std::size_t> ids;
  for (const auto& r : rows) {
    same_tape(rows.front(), r, "stack");
    if (r.value().size() != width) {
      throw DimensionError("stack: row shape " + shape_string(r.value().shape()) +
                           " vs " + shape_string(rows.front().value().shape()));
    }
    data.insert(data.end(), r.value().data().begin(), r.value().data().end());
    ids.push_back(r.id());
  }
  Tensor out({rows.size(), width}, std::move(data));
  return rows.front().tape().record(std::move(out), ids,
                                    [ids, width](Tape& t, std::size_t self) {
                                      const auto& gy = t.node_grad(self);
                                      for (std::size_t r = 0; r < ids.size(); ++r) {
                                        auto& g = t.node_grad(ids[r]);
                                        for (std::size_t i = 0; i < width; ++i) {
                                          g[i] += gy[r * width + i];
                                        }
                                      }
                                    });
}

Var row(Var matrix, std::size_t r) {
  const auto& m = matrix.value();
  if (m.rank() != 2 || r >= m.rows()) {
    throw DimensionError("row: index " + std::to_string(r) +
                         " out of range for shape " + shape_string(m.shape()));
  }
  const std::size_t width = m.cols();
  auto span = m.row(r);
  Tensor out = Tensor::vector(std::vector<double>(span.begin(), span.end()));
  std::size_t in = matrix.id();
  return matrix.tape().record(std::move(out), {in}, [in, r, width](Tape& t, std::size_t self) {
    const auto& gy = t.node_grad(self);
    auto& gx = t.node_grad(in);
    for (std::size_t i = 0; i < width; ++i) gx[r * width + i] += gy[i];
  });
}

LstmState lstm_cell(Var x, Var h_prev, Var c_prev, Var weight, Var bias) {
  const std::size_t hidden = h_prev.value().size();
  const auto& W = weight.value();
  if (W.rank() != 2 || W.rows() != 4 * hidden ||
      W.cols() != x.value().size() + hidden || bias.value().size() != 4 * hidden ||
      c_prev.value().size() != hidden) {
    throw DimensionError("lstm_cell: weight " + shape_string(W.shape()) +
                         ", bias " + shape_string(bias.value().shape()) +
                         ", x " + shape_string(x.value().shape()) + ", h " +
                         shape_string(h_prev.value().shape()) + ", c " +
                         shape_string(c_prev.value().shape()));
  }
  Var z = affine(weight, concat({x, h_prev}), bias);
  Var in_gate = sigmoid(slice(z, 0, hidden));
  Var forget_gate = sigmoid(slice(z, hidden, hidden));
  Var candidate = tanh(slice(z, 2 * hidden, hidden));
  Var out_gate = sigmoid(slice(z, 3 * hidden, hidden));
  Var c = add(mul(forget_gate, c_prev), mul(in_gate, candidate));
  Var h = mul(out_gate, tanh(c));
  return {h, c};
}

}  // namespace nesc
