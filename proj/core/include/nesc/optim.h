#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nesc/autodiff.h"

namespace nesc {

/// All stochastic operations take this engine explicitly.
using Rng = std::mt19937_64;

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators for one ParameterSet, aligned by position.
struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
};

AdamState make_adam_state(const ParameterSet& params);

// Bias-corrected Adam update from each parameter's grad field. Throws
// TrainingError naming the first parameter block with a non-finite gradient;
// nothing is updated in that case.
void adam_step(ParameterSet& params, AdamState& state, const AdamConfig& config);

// Rescales all gradients so their joint L2 norm is at most max_norm.
// Returns the norm measured before clipping.
double clip_global_norm(ParameterSet& params, double max_norm);

// Uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)) over a [rows x cols]
// matrix.
void init_glorot_uniform(Tensor& matrix, Rng& rng);

}  // namespace nesc
