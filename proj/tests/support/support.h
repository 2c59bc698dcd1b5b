#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nesc/autodiff.h"
#include "nesc/corpus.h"
#include "nesc/crf.h"
#include "nesc/nesc_model.h"
#include "nesc/optim.h"

namespace nesc::testing {

/// ||a - b|| / max(||a|| + ||b||, 1e-12), over a whole block.
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

struct BlockError {
  std::string name;
  double relative = 0;
};

/// Compares tape gradients of the scalar built by `build` against central
/// differences with step `h`, one entry per parameter block.
std::vector<BlockError> gradient_check(ParameterSet& params,
                                       const std::function<Var(Tape&)>& build,
                                       double h = 1e-5);

/// All kNumLabels^T label paths, first label varying slowest.
std::vector<std::vector<std::size_t>> all_label_paths(std::size_t length);

/// Brute-force log Z: log of the explicit sum over every path.
double brute_force_log_partition(const Tensor& emissions, const Tensor& transitions);

/// Brute-force argmax. Among exactly tied best paths, picks the one the
/// backtracking tie rule produces: smallest last label, then smallest
/// predecessor, and so on.
ViterbiResult brute_force_viterbi(const Tensor& emissions, const Tensor& transitions);

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0);

/// Corpus of short sentences with entities drawn from a fixed gazetteer,
/// so a tagger can learn them by memorization.
Corpus synthetic_corpus(std::size_t sentences, std::uint64_t seed);

}  // namespace nesc::testing

namespace nesc::testing {

/// Window slices whose class is the sign of column 0 (+1 or -1 in every
/// row) with uniform noise of at most `noise` elsewhere, so the classes are
/// linearly separable in encoder space. Classes alternate.
std::vector<WindowExample> separable_windows(std::size_t count, std::size_t length,
                                             std::size_t width, std::uint64_t seed,
                                             double noise = 0.5);

}  // namespace nesc::testing

namespace nesc::testing {

/// Least-squares monotone fit by enumerating every contiguous partition of
/// the distinct-score groups. Returns the fitted value for each input. Only
/// usable for a handful of distinct scores.
std::vector<double> brute_force_isotonic(std::span<const double> scores,
                                         std::span<const int> labels);

struct SetCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Token counts from the sets of non-O positions.
SetCounts oracle_token_counts(std::span<const Label> gold, std::span<const Label> predicted);

/// Entity counts from sets of (start, end[, type]) tuples. Spans are read
/// from the labels with a separate scanner, not decode_spans.
SetCounts oracle_entity_counts(std::span<const Label> gold, std::span<const Label> predicted,
                               bool typed);

std::vector<Label> random_labels(std::size_t length, Rng& rng);

}  // namespace nesc::testing
