#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nesc/autodiff.h"
#include "nesc/tagset.h"
#include "nesc/tensor.h"

namespace nesc {

// Transition matrices are [kCrfStates x kCrfStates]: the 11 labels plus a
// virtual START row and END column. The START column and END row are unused.
inline constexpr std::size_t kStartState = kNumLabels;
inline constexpr std::size_t kEndState = kNumLabels + 1;
inline constexpr std::size_t kCrfStates = kNumLabels + 2;

// Emissions are [T x 11] score matrices; labels are label indices.

/// Sum of emissions along the path plus START->y0, y(t-1)->y(t) and
/// y(T-1)->END transitions.
double crf_path_score(const Tensor& emissions, const Tensor& transitions,
                      std::span<const std::size_t> labels);

/// log Z by the forward algorithm.
double crf_log_partition(const Tensor& emissions, const Tensor& transitions);

/// log Z - score(gold).
double crf_nll(const Tensor& emissions, const Tensor& transitions,
               std::span<const std::size_t> gold);

/// Recording version; gradients come from forward-backward marginals.
Var crf_nll(Var emissions, Var transitions, std::span<const std::size_t> gold);

struct ViterbiResult {
  std::vector<std::size_t> labels;
  double score = 0.0;
};

/// Highest-scoring path. Ties go to the lowest label index, both for the
/// final label and at every backtrack step.
ViterbiResult viterbi(const Tensor& emissions, const Tensor& transitions);

}  // namespace nesc
