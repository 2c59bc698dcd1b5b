#include "nesc/crf.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "nesc/errors.h"
#include "nesc/ops.h"

namespace nesc {
namespace {

constexpr std::size_t L = kNumLabels;

void check_shapes(const Tensor& emissions, const Tensor& transitions) {
  if (emissions.rank() != 2 || emissions.cols() != L || emissions.rows() == 0) {
    throw DimensionError("crf: emissions must be [T x 11] with T >= 1, got " +
                         shape_string(emissions.shape()));
  }
  if (transitions.shape() != Shape{kCrfStates, kCrfStates}) {
    throw DimensionError("crf: transitions must be [13 x 13], got " +
                         shape_string(transitions.shape()));
  }
}

void check_labels(const Tensor& emissions, std::span<const std::size_t> labels) {
  if (labels.size() != emissions.rows()) {
    throw UsageError("crf: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(emissions.rows()) + " emission rows");
  }
  for (std::size_t y : labels) {
    if (y >= L) throw UsageError("crf: label index " + std::to_string(y) + " out of range");
  }
}

using Lattice = std::vector<std::array<double, L>>;

Lattice forward_scores(const Tensor& e, const Tensor& tr) {
  const std::size_t T = e.rows();
  Lattice alpha(T);
  for (std::size_t y = 0; y < L; ++y) alpha[0][y] = tr.at(kStartState, y) + e.at(0, y);
  std::array<double, L> terms;
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t p = 0; p < L; ++p) terms[p] = alpha[t - 1][p] + tr.at(p, y);
      alpha[t][y] = e.at(t, y) + log_sum_exp(terms);
    }
  }
  return alpha;
}

Lattice backward_scores(const Tensor& e, const Tensor& tr) {
  const std::size_t T = e.rows();
  Lattice beta(T);
  for (std::size_t y = 0; y < L; ++y) beta[T - 1][y] = tr.at(y, kEndState);
  std::array<double, L> terms;
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t n = 0; n < L; ++n) terms[n] = tr.at(y, n) + e.at(t + 1, n) + beta[t + 1][n];
      beta[t][y] = log_sum_exp(terms);
    }
  }
  return beta;
}

double partition_from_alpha(const Lattice& alpha, const Tensor& tr) {
  std::array<double, L> terms;
  for (std::size_t y = 0; y < L; ++y) terms[y] = alpha.back()[y] + tr.at(y, kEndState);
  return log_sum_exp(terms);
}

}  // namespace

double crf_path_score(const Tensor& emissions, const Tensor& transitions,
                      std::span<const std::size_t> labels) {
  check_shapes(emissions, transitions);
  check_labels(emissions, labels);
  double score = transitions.at(kStartState, labels[0]);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    score += emissions.at(t, labels[t]);
    if (t > 0) score += transitions.at(labels[t - 1], labels[t]);
  }
  return score + transitions.at(labels.back(), kEndState);
}

double crf_log_partition(const Tensor& emissions, const Tensor& transitions) {
  check_shapes(emissions, transitions);
  return partition_from_alpha(forward_scores(emissions, transitions), transitions);
}

double crf_nll(const Tensor& emissions, const Tensor& transitions,
               std::span<const std::size_t> gold) {
  check_shapes(emissions, transitions);
  check_labels(emissions, gold);
  return crf_log_partition(emissions, transitions) -
         crf_path_score(emissions, transitions, gold);
}

Var crf_nll(Var emissions, Var transitions, std::span<const std::size_t> gold) {
  const double loss = crf_nll(emissions.value(), transitions.value(), gold);
  std::vector<std::size_t> labels(gold.begin(), gold.end());
  const std::size_t ei = emissions.id(), ti = transitions.id();
  return emissions.tape().record(
      Tensor::scalar(loss), {ei, ti},
      [ei, ti, labels = std::move(labels)](Tape& tape, std::size_t self) {
        const double g = tape.node_grad(self)[0];
        const auto& e = tape.node_value(ei);
        const auto& tr = tape.node_value(ti);
        const std::size_t T = e.rows();
        const Lattice alpha = forward_scores(e, tr);
        const Lattice beta = backward_scores(e, tr);
        const double log_z = partition_from_alpha(alpha, tr);

        auto& ge = tape.node_grad(ei);
        auto& gt = tape.node_grad(ti);
        for (std::size_t t = 0; t < T; ++t) {
          for (std::size_t y = 0; y < L; ++y) {
            const double marginal = std::exp(alpha[t][y] + beta[t][y] - log_z);
            ge.at(t, y) += g * marginal;
            if (t == 0) gt.at(kStartState, y) += g * marginal;
            if (t == T - 1) gt.at(y, kEndState) += g * marginal;
          }
          if (t == 0) continue;
          for (std::size_t p = 0; p < L; ++p) {
            for (std::size_t y = 0; y < L; ++y) {
              const double pair = std::exp(alpha[t - 1][p] + tr.at(p, y) + e.at(t, y) +
                                           beta[t][y] - log_z);
              gt.at(p, y) += g * pair;
            }
          }
        }

        // Minus the gold path's indicator counts.
        gt.at(kStartState, labels[0]) -= g;
        gt.at(labels.back(), kEndState) -= g;
        for (std::size_t t = 0; t < T; ++t) {
          ge.at(t, labels[t]) -= g;
          if (t > 0) gt.at(labels[t - 1], labels[t]) -= g;
        }
      });
}

ViterbiResult viterbi(const Tensor& emissions, const Tensor& transitions) {
  check_shapes(emissions, transitions);
  const auto& e = emissions;
  const auto& tr = transitions;
  const std::size_t T = e.rows();

  Lattice best(T);
  std::vector<std::array<std::size_t, L>> back(T);
  for (std::size_t y = 0; y < L; ++y) best[0][y] = tr.at(kStartState, y) + e.at(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      std::size_t arg = 0;
      double top = best[t - 1][0] + tr.at(0, y);
      for (std::size_t p = 1; p < L; ++p) {
        const double s = best[t - 1][p] + tr.at(p, y);
        if (s > top) {
          top = s;
          arg = p;
        }
      }
      best[t][y] = top + e.at(t, y);
      back[t][y] = arg;
    }
  }

  std::size_t last = 0;
  double top = best[T - 1][0] + tr.at(0, kEndState);
  for (std::size_t y = 1; y < L; ++y) {
    const double s = best[T - 1][y] + tr.at(y, kEndState);
    if (s > top) {
      top = s;
      last = y;
    }
  }

  ViterbiResult result;
  result.labels.resize(T);
  result.labels[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) result.labels[t - 1] = back[t][result.labels[t]];
  result.score = top;
  return result;
}

}  // namespace nesc
