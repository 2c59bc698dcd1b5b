#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nesc/autodiff.h"
#include "nesc/featurize.h"
#include "nesc/optim.h"
#include "nesc/tagset.h"

namespace nesc {

/// Inclusive token range [start, end] with an optional entity type.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::optional<EntityType> type;

  std::size_t length() const { return end - start + 1; }
  bool same_range(const EntitySpan& other) const {
    return start == other.start && end == other.end;
  }
  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

/// Maximal B-X (I-X)* runs become spans of type X. An I-X that does not
/// continue an X entity opens a new span as if it were B-X.
std::vector<EntitySpan> decode_spans(std::span<const Label> labels);

/// Inverse of decode_spans for non-overlapping typed spans.
std::vector<Label> encode_spans(std::span<const EntitySpan> spans, std::size_t length);

struct NerConfig {
  std::size_t hidden = 100;
  double dropout = 0.5;
  std::size_t epochs = 30;
  double clip_norm = 5.0;
  AdamConfig adam;
  std::size_t input_dim = kTokenDim;
};

/// Weights of the biLSTM-CRF tagger. Parameter names:
///   encoder.forward.{weight,bias}, encoder.backward.{weight,bias},
///   dense.{weight,bias}, crf.transitions
struct NerModel {
  NerConfig config;
  ParameterSet params;
};

NerModel init_ner_model(const NerConfig& config, Rng& rng);

// Throws UsageError when the vectors are not config.input_dim wide.
using FeatureSequence = std::vector<std::vector<double>>;
FeatureSequence to_features(std::span<const TokenVector> vectors);

// Encoder outputs [h_fwd(t) | h_bwd(t)] per position, recorded on `tape`.
// With train_mode, inverted dropout is applied to the outputs using rng.
std::vector<Var> encode(Tape& tape, const FeatureSequence& features, const NerModel& model,
                        bool train_mode, Rng* rng);
// Per-token 11-way log-probabilities.
std::vector<Var> emissions(Tape& tape, const std::vector<Var>& context, const NerModel& model);
// Sentence negative log-likelihood under the CRF.
Var ner_loss(Tape& tape, const FeatureSequence& features, std::span<const Label> gold,
             const NerModel& model, bool train_mode, Rng* rng);

/// Evaluation-mode encoder outputs as an [n x 2H] matrix.
Tensor encode_sequence(const FeatureSequence& features, const NerModel& model);
Tensor emission_matrix(const Tensor& context, const NerModel& model);

struct TagResult {
  std::vector<Label> labels;
  std::vector<EntitySpan> spans;
  Tensor probabilities;  // [T x 11]; empty for an empty sentence
};

TagResult tag(const FeatureSequence& features, const NerModel& model);

struct LabeledSequence {
  FeatureSequence features;
  std::vector<Label> labels;
};

struct NerTrainingResult {
  NerModel model;
  std::vector<double> epoch_loss;  // mean sentence loss per epoch
};

// Per-sentence Adam updates over shuffled epochs; deterministic given rng.
// on_epoch, when set, receives (epoch index, mean loss) after each epoch.
NerTrainingResult train_ner(std::span<const LabeledSequence> corpus, const NerConfig& config,
                            Rng& rng,
                            const std::function<void(std::size_t, double)>& on_epoch = {});

}  // namespace nesc
