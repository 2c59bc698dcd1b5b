#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nesc/autodiff.h"
#include "nesc/optim.h"

namespace nesc {

/// Candidate span [start, end] widened by `context` positions on each side.
/// Positions are in unpadded sentence coordinates, so the first one may be
/// negative and the last may reach past the sentence; those are pads.
struct ContextWindow {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t context = 0;
  std::size_t sentence_length = 0;

  std::ptrdiff_t first() const;
  std::ptrdiff_t last() const;
  std::size_t size() const { return end - start + 1 + 2 * context; }
  bool is_pad(std::ptrdiff_t position) const;
  std::size_t pad_count() const;
};

// Throws UsageError unless start <= end < sentence_length.
ContextWindow context_window(std::size_t start, std::size_t end, std::size_t context,
                             std::size_t sentence_length);

/// Rows of `encoder_outputs` ([n x width]) covered by the window; pad
/// positions become zero rows. Result is [window.size() x width].
Tensor window_slice(const Tensor& encoder_outputs, const ContextWindow& window);

struct NescConfig {
  std::size_t hidden = 100;
  std::size_t context = 2;
  std::size_t epochs = 10;
  double clip_norm = 5.0;
  AdamConfig adam;
  std::size_t input_dim = 200;  // encoder output width, 2H
};

/// Span classifier head. Parameter names: head.{weight,bias}, out.{weight,bias}.
/// Output index 1 is the "is an entity" class.
struct NescModel {
  NescConfig config;
  ParameterSet params;
  double positive_weight = 1.0;
  double negative_weight = 1.0;
};

NescModel init_nesc_model(const NescConfig& config, Rng& rng);

// Two-class probabilities [p(not entity), p(entity)] for one window slice.
Var nesc_probabilities(Tape& tape, const Tensor& slice, const NescModel& model);
double nesc_score(const Tensor& slice, const NescModel& model);

// -w_pos*y*log(p) - w_neg*(1-y)*log(1-p), with p clamped to [1e-12, 1-1e-12].
double weighted_ce(double p, int target, double positive_weight, double negative_weight);
// Same loss on the positive entry of a two-class probability vector.
Var weighted_ce(Var probabilities, int target, double positive_weight, double negative_weight);

Var nesc_loss(Tape& tape, const Tensor& slice, int target, const NescModel& model);

struct WindowExample {
  Tensor slice;
  int target = 0;
};

struct NescTrainingResult {
  NescModel model;
  std::vector<double> epoch_loss;
};

// Trains a fresh head on prepared window slices with per-sample Adam steps.
NescTrainingResult train_nesc_head(std::span<const WindowExample> examples,
                                   const NescConfig& config, double positive_weight,
                                   double negative_weight, Rng& rng,
                                   const std::function<void(std::size_t, double)>& on_epoch = {});

}  // namespace nesc
