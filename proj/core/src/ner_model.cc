#include "nesc/ner_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nesc/crf.h"
#include "nesc/errors.h"
#include "nesc/ops.h"

namespace nesc {

std::vector<EntitySpan> decode_spans(std::span<const Label> labels) {
  std::vector<EntitySpan> spans;
  std::optional<EntitySpan> open;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const Label l = labels[t];
    if (l == Label::kO) {
      if (open) spans.push_back(*open);
      open.reset();
      continue;
    }
    const EntityType type = type_of(l);
    if (is_inside(l) && open && open->type == type) {
      open->end = t;
      continue;
    }
    if (open) spans.push_back(*open);
    open = EntitySpan{t, t, type};
  }
  if (open) spans.push_back(*open);
  return spans;
}

std::vector<Label> encode_spans(std::span<const EntitySpan> spans, std::size_t length) {
  std::vector<Label> labels(length, Label::kO);
  for (const auto& s : spans) {
    if (s.start > s.end || s.end >= length) {
      throw UsageError("encode_spans: span [" + std::to_string(s.start) + ", " +
                       std::to_string(s.end) + "] outside sentence of length " +
                       std::to_string(length));
    }
    if (!s.type) throw UsageError("encode_spans: span has no entity type");
    for (std::size_t t = s.start; t <= s.end; ++t) {
      if (labels[t] != Label::kO) throw UsageError("encode_spans: overlapping spans");
      labels[t] = t == s.start ? begin_label(*s.type) : inside_label(*s.type);
    }
  }
  return labels;
}

NerModel init_ner_model(const NerConfig& config, Rng& rng) {
  if (config.hidden == 0) throw UsageError("ner: hidden size must be positive");
  if (config.dropout < 0 || config.dropout >= 1) {
    throw UsageError("ner: dropout must be in [0, 1)");
  }
  NerModel model{config, {}};
  const std::size_t H = config.hidden;
  for (const char* dir : {"forward", "backward"}) {
    Tensor weight({4 * H, config.input_dim + H});
    init_glorot_uniform(weight, rng);
    Tensor bias({4 * H});
    for (std::size_t i = H; i < 2 * H; ++i) bias[i] = 1.0;
    model.params.add(std::string("encoder.") + dir + ".weight", std::move(weight));
    model.params.add(std::string("encoder.") + dir + ".bias", std::move(bias));
  }
  Tensor dense({kNumLabels, 2 * H});
  init_glorot_uniform(dense, rng);
  model.params.add("dense.weight", std::move(dense));
  model.params.add("dense.bias", Tensor({kNumLabels}));
  Tensor transitions({kCrfStates, kCrfStates});
  init_glorot_uniform(transitions, rng);
  model.params.add("crf.transitions", std::move(transitions));
  return model;
}

FeatureSequence to_features(std::span<const TokenVector> vectors) {
  FeatureSequence out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.emplace_back(v.begin(), v.end());
  return out;
}

std::vector<Var> encode(Tape& tape, const FeatureSequence& features, const NerModel& model,
                        bool train_mode, Rng* rng) {
  if (features.empty()) throw UsageError("encode: empty sequence");
  const std::size_t n = features.size();
  const std::size_t H = model.config.hidden;
  for (const auto& f : features) {
    if (f.size() != model.config.input_dim) {
      throw UsageError("encode: token vector of width " + std::to_string(f.size()) +
                       ", model expects " + std::to_string(model.config.input_dim));
    }
  }

  std::vector<Var> inputs;
  inputs.reserve(n);
  for (const auto& f : features) inputs.push_back(tape.constant(Tensor::vector(f)));

  auto run = [&](const char* dir, bool reverse) {
    Var weight = tape.parameter(model.params.get(std::string("encoder.") + dir + ".weight"));
    Var bias = tape.parameter(model.params.get(std::string("encoder.") + dir + ".bias"));
    LstmState state{tape.constant(Tensor({H})), tape.constant(Tensor({H}))};
    std::vector<Var> out(n);
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t t = reverse ? n - 1 - step : step;
      state = lstm_cell(inputs[t], state.h, state.c, weight, bias);
      out[t] = state.h;
    }
    return out;
  };
  const auto fwd = run("forward", false);
  const auto bwd = run("backward", true);

  std::vector<Var> context(n);
  const double p = model.config.dropout;
  for (std::size_t t = 0; t < n; ++t) {
    context[t] = concat({fwd[t], bwd[t]});
    if (train_mode && p > 0) {
      if (!rng) throw UsageError("encode: train mode requires an rng");
      std::bernoulli_distribution keep(1.0 - p);
      Tensor mask({2 * H});
      for (auto& m : mask.values()) m = keep(*rng) ? 1.0 / (1.0 - p) : 0.0;
      context[t] = mul(context[t], tape.constant(std::move(mask)));
    }
  }
  return context;
}

std::vector<Var> emissions(Tape& tape, const std::vector<Var>& context, const NerModel& model) {
  Var weight = tape.parameter(model.params.get("dense.weight"));
  Var bias = tape.parameter(model.params.get("dense.bias"));
  std::vector<Var> out;
  out.reserve(context.size());
  for (const auto& c : context) out.push_back(log_softmax(affine(weight, c, bias)));
  return out;
}

Var ner_loss(Tape& tape, const FeatureSequence& features, std::span<const Label> gold,
             const NerModel& model, bool train_mode, Rng* rng) {
  if (gold.size() != features.size()) {
    throw UsageError("ner_loss: " + std::to_string(gold.size()) + " labels for " +
                     std::to_string(features.size()) + " tokens");
  }
  const auto context = encode(tape, features, model, train_mode, rng);
  Var scores = stack(emissions(tape, context, model));
  std::vector<std::size_t> labels(gold.size());
  std::transform(gold.begin(), gold.end(), labels.begin(), index_of);
  return crf_nll(scores, tape.parameter(model.params.get("crf.transitions")), labels);
}

Tensor encode_sequence(const FeatureSequence& features, const NerModel& model) {
  Tape tape;
  const auto context = encode(tape, features, model, false, nullptr);
  const std::size_t width = 2 * model.config.hidden;
  Tensor out({context.size(), width});
  for (std::size_t t = 0; t < context.size(); ++t) {
    std::copy(context[t].value().data().begin(), context[t].value().data().end(),
              out.row(t).begin());
  }
  return out;
}

Tensor emission_matrix(const Tensor& context, const NerModel& model) {
  const auto& weight = model.params.get("dense.weight").value;
  const auto& bias = model.params.get("dense.bias").value;
  Tensor out({context.rows(), kNumLabels});
  for (std::size_t t = 0; t < context.rows(); ++t) {
    auto r = context.row(t);
    Tensor logp = log_softmax(affine(weight, Tensor::vector(std::vector<double>(r.begin(), r.end())), bias));
    std::copy(logp.data().begin(), logp.data().end(), out.row(t).begin());
  }
  return out;
}

TagResult tag(const FeatureSequence& features, const NerModel& model) {
  TagResult result;
  if (features.empty()) return result;
  const Tensor scores = emission_matrix(encode_sequence(features, model), model);
  const auto best = viterbi(scores, model.params.get("crf.transitions").value);
  result.labels.reserve(best.labels.size());
  for (std::size_t y : best.labels) result.labels.push_back(label_at(y));
  result.spans = decode_spans(result.labels);
  result.probabilities = scores;
  for (auto& v : result.probabilities.values()) v = std::exp(v);
  return result;
}

NerTrainingResult train_ner(std::span<const LabeledSequence> corpus, const NerConfig& config,
                            Rng& rng, const std::function<void(std::size_t, double)>& on_epoch) {
  if (corpus.empty()) throw UsageError("train_ner: empty corpus");
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (corpus[s].features.empty() || corpus[s].features.size() != corpus[s].labels.size()) {
      throw UsageError("train_ner: sentence " + std::to_string(s) +
                       " is empty or has mismatched labels");
    }
  }

  NerTrainingResult result{init_ner_model(config, rng), {}};
  NerModel& model = result.model;
  AdamState adam = make_adam_state(model.params);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t s : order) {
      Tape tape;
      Var loss = ner_loss(tape, corpus[s].features, corpus[s].labels, model, true, &rng);
      const double value = loss.value()[0];
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite NER loss at sentence " + std::to_string(s) +
                            " in epoch " + std::to_string(epoch));
      }
      total += value;
      tape.backward(loss);
      tape.collect_gradients(model.params);
      clip_global_norm(model.params, config.clip_norm);
      adam_step(model.params, adam, config.adam);
    }
    const double mean = total / static_cast<double>(corpus.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace nesc
