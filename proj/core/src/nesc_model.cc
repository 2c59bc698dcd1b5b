#include "nesc/nesc_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nesc/errors.h"
#include "nesc/ops.h"

namespace nesc {

namespace {
constexpr double kProbabilityFloor = 1e-12;
}

std::ptrdiff_t ContextWindow::first() const {
  return static_cast<std::ptrdiff_t>(start) - static_cast<std::ptrdiff_t>(context);
}

std::ptrdiff_t ContextWindow::last() const {
  return static_cast<std::ptrdiff_t>(end + context);
}

bool ContextWindow::is_pad(std::ptrdiff_t position) const {
  return position < 0 || position >= static_cast<std::ptrdiff_t>(sentence_length);
}

std::size_t ContextWindow::pad_count() const {
  std::size_t pads = 0;
  for (auto p = first(); p <= last(); ++p) pads += is_pad(p) ? 1 : 0;
  return pads;
}

ContextWindow context_window(std::size_t start, std::size_t end, std::size_t context,
                             std::size_t sentence_length) {
  if (start > end || end >= sentence_length) {
    throw UsageError("context_window: span [" + std::to_string(start) + ", " +
                     std::to_string(end) + "] invalid for sentence of length " +
                     std::to_string(sentence_length));
  }
  return ContextWindow{start, end, context, sentence_length};
}

Tensor window_slice(const Tensor& encoder_outputs, const ContextWindow& window) {
  if (encoder_outputs.rank() != 2 || encoder_outputs.rows() != window.sentence_length) {
    throw UsageError("window_slice: encoder outputs " +
                     shape_string(encoder_outputs.shape()) + " for sentence of length " +
                     std::to_string(window.sentence_length));
  }
  const std::size_t width = encoder_outputs.cols();
  Tensor out({window.size(), width});
  std::size_t r = 0;
  for (auto p = window.first(); p <= window.last(); ++p, ++r) {
    if (window.is_pad(p)) continue;
    auto src = encoder_outputs.row(static_cast<std::size_t>(p));
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

NescModel init_nesc_model(const NescConfig& config, Rng& rng) {
  if (config.hidden == 0) throw UsageError("nesc: hidden size must be positive");
  NescModel model{config, {}, 1.0, 1.0};
  const std::size_t G = config.hidden;
  Tensor weight({4 * G, config.input_dim + G});
  init_glorot_uniform(weight, rng);
  Tensor bias({4 * G});
  for (std::size_t i = G; i < 2 * G; ++i) bias[i] = 1.0;
  model.params.add("head.weight", std::move(weight));
  model.params.add("head.bias", std::move(bias));
  Tensor out({2, G});
  init_glorot_uniform(out, rng);
  model.params.add("out.weight", std::move(out));
  model.params.add("out.bias", Tensor({2}));
  return model;
}

Var nesc_probabilities(Tape& tape, const Tensor& slice, const NescModel& model) {
  if (slice.rank() != 2 || slice.rows() == 0) {
    throw UsageError("nesc_score: empty window slice");
  }
  if (slice.cols() != model.config.input_dim) {
    throw DimensionError("nesc_score: slice " + shape_string(slice.shape()) +
                         " but head expects width " + std::to_string(model.config.input_dim));
  }
  const std::size_t G = model.config.hidden;
  Var weight = tape.parameter(model.params.get("head.weight"));
  Var bias = tape.parameter(model.params.get("head.bias"));
  LstmState state{tape.constant(Tensor({G})), tape.constant(Tensor({G}))};
  for (std::size_t t = 0; t < slice.rows(); ++t) {
    auto r = slice.row(t);
    Var x = tape.constant(Tensor::vector(std::vector<double>(r.begin(), r.end())));
    state = lstm_cell(x, state.h, state.c, weight, bias);
  }
  Var logits = affine(tape.parameter(model.params.get("out.weight")), state.h,
                      tape.parameter(model.params.get("out.bias")));
  return softmax(logits);
}

double nesc_score(const Tensor& slice, const NescModel& model) {
  Tape tape;
  return nesc_probabilities(tape, slice, model).value()[1];
}

double weighted_ce(double p, int target, double positive_weight, double negative_weight) {
  const double q = std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
  return target == 1 ? -positive_weight * std::log(q) : -negative_weight * std::log(1.0 - q);
}

Var weighted_ce(Var probabilities, int target, double positive_weight, double negative_weight) {
  if (probabilities.value().size() != 2) {
    throw DimensionError("weighted_ce: expected two class probabilities, got " +
                         shape_string(probabilities.value().shape()));
  }
  const double p = probabilities.value()[1];
  const double loss = weighted_ce(p, target, positive_weight, negative_weight);
  const std::size_t in = probabilities.id();
  return probabilities.tape().record(
      Tensor::scalar(loss), {in},
      [in, target, positive_weight, negative_weight](Tape& t, std::size_t self) {
        const double g = t.node_grad(self)[0];
        const double p = t.node_value(in)[1];
        if (p < kProbabilityFloor || p > 1.0 - kProbabilityFloor) return;
        const double d = target == 1 ? -positive_weight / p : negative_weight / (1.0 - p);
        t.node_grad(in)[1] += g * d;
      });
}

Var nesc_loss(Tape& tape, const Tensor& slice, int target, const NescModel& model) {
  return weighted_ce(nesc_probabilities(tape, slice, model), target, model.positive_weight,
                     model.negative_weight);
}

NescTrainingResult train_nesc_head(std::span<const WindowExample> examples,
                                   const NescConfig& config, double positive_weight,
                                   double negative_weight, Rng& rng,
                                   const std::function<void(std::size_t, double)>& on_epoch) {
  if (examples.empty()) throw UsageError("train_nesc: no training windows");
  if (!(positive_weight > 0) || !(negative_weight > 0)) {
    throw UsageError("train_nesc: class weights must be positive");
  }
  NescTrainingResult result{init_nesc_model(config, rng), {}};
  NescModel& model = result.model;
  model.positive_weight = positive_weight;
  model.negative_weight = negative_weight;

  AdamState adam = make_adam_state(model.params);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t s : order) {
      Tape tape;
      Var loss = nesc_loss(tape, examples[s].slice, examples[s].target, model);
      const double value = loss.value()[0];
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite NESC loss at sample " + std::to_string(s));
      }
      total += value;
      tape.backward(loss);
      tape.collect_gradients(model.params);
      clip_global_norm(model.params, config.clip_norm);
      adam_step(model.params, adam, config.adam);
    }
    const double mean = total / static_cast<double>(examples.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace nesc
