#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nesc/crf.h"
#include "nesc/errors.h"
#include "nesc/ops.h"
#include "support/support.h"

namespace nesc {
namespace {

using testing::all_label_paths;
using testing::brute_force_log_partition;
using testing::brute_force_viterbi;
using testing::random_tensor;

Tensor zero_transitions() { return Tensor({kCrfStates, kCrfStates}); }

TEST(CrfNll, SingleStepReducesToSoftmaxLoss) {
  Rng rng(1);
  Tensor e = random_tensor({1, kNumLabels}, rng, 2.0);
  const std::vector<std::size_t> gold{4};
  const double expected = log_sum_exp(e.row(0)) - e.at(0, 4);
  EXPECT_NEAR(crf_nll(e, zero_transitions(), gold), expected, 1e-12);
}

TEST(CrfNll, TwoStepsMatchEnumerationOf121Paths) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor e = random_tensor({2, kNumLabels}, rng, 2.0);
    Tensor tr = random_tensor({kCrfStates, kCrfStates}, rng, 2.0);
    const std::vector<std::size_t> gold{3, 4};
    double gold_score = tr.at(kStartState, 3) + e.at(0, 3) + tr.at(3, 4) + e.at(1, 4) +
                        tr.at(4, kEndState);
    EXPECT_NEAR(crf_nll(e, tr, gold), brute_force_log_partition(e, tr) - gold_score, 1e-8);
  }
}

TEST(CrfNll, UniformEmissionsGiveTLogEleven) {
  for (std::size_t T : {1u, 2u, 5u}) {
    Tensor e({T, kNumLabels}, -std::log(11.0));
    std::vector<std::size_t> gold(T, 0);
    gold.back() = 7;
    // Every path scores -T ln 11 and there are 11^T of them, so log Z = 0.
    EXPECT_NEAR(crf_nll(e, zero_transitions(), gold), T * std::log(11.0), 1e-10);
  }
}

TEST(CrfNll, LengthMismatchIsUsageError) {
  const std::vector<std::size_t> gold{0};
  EXPECT_THROW(crf_nll(Tensor({2, kNumLabels}), zero_transitions(), gold), UsageError);
}

TEST(CrfNll, PropertyLogPartitionMatchesEnumeration) {
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t T = 1 + trial % 4;
    Tensor e = random_tensor({T, kNumLabels}, rng, 3.0);
    Tensor tr = random_tensor({kCrfStates, kCrfStates}, rng, 3.0);
    ASSERT_NEAR(crf_log_partition(e, tr), brute_force_log_partition(e, tr), 1e-8);
  }
}

TEST(CrfNll, PropertyPathDistributionNormalizes) {
  Rng rng(4);
  for (std::size_t T = 1; T <= 3; ++T) {
    Tensor e = random_tensor({T, kNumLabels}, rng, 2.0);
    Tensor tr = random_tensor({kCrfStates, kCrfStates}, rng, 2.0);
    double total = 0;
    for (const auto& path : all_label_paths(T)) total += std::exp(-crf_nll(e, tr, path));
    EXPECT_NEAR(total, 1.0, 1e-8);
  }
}

TEST(CrfNll, TapeGradientMatchesFiniteDifferences) {
  Rng rng(5);
  ParameterSet params;
  params.add("emissions", random_tensor({3, kNumLabels}, rng, 2.0));
  params.add("transitions", random_tensor({kCrfStates, kCrfStates}, rng, 2.0));
  const std::vector<std::size_t> gold{1, 2, 0};
  auto errors = testing::gradient_check(params, [&](Tape& t) {
    return crf_nll(t.parameter(params.get("emissions")), t.parameter(params.get("transitions")),
                   gold);
  });
  for (const auto& e : errors) EXPECT_LT(e.relative, 1e-6) << e.name;
}

TEST(Viterbi, SingleStepPicksBestEmissionPlusBoundaries) {
  Tensor e({1, kNumLabels});
  e.at(0, 2) = 1.0;
  e.at(0, 5) = 1.5;
  Tensor tr = zero_transitions();
  tr.at(kStartState, 2) = 1.0;
  auto r = viterbi(e, tr);
  EXPECT_EQ(r.labels, std::vector<std::size_t>{2});
  EXPECT_DOUBLE_EQ(r.score, 2.0);
}

TEST(Viterbi, MatchesBruteForceArgmax) {
  Rng rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t T = 1 + trial % 4;
    Tensor e = random_tensor({T, kNumLabels}, rng, 3.0);
    Tensor tr = random_tensor({kCrfStates, kCrfStates}, rng, 3.0);
    auto fast = viterbi(e, tr);
    auto slow = brute_force_viterbi(e, tr);
    ASSERT_EQ(fast.labels, slow.labels);
    ASSERT_NEAR(fast.score, slow.score, 1e-10);
  }
}

TEST(Viterbi, TiesGoToLowestLabels) {
  Tensor e({3, kNumLabels});
  auto r = viterbi(e, zero_transitions());
  EXPECT_EQ(r.labels, (std::vector<std::size_t>{0, 0, 0}));
  auto slow = brute_force_viterbi(e, zero_transitions());
  EXPECT_EQ(slow.labels, r.labels);

  // Integer-valued ties between labels 3 and 5 at the last step.
  e.at(2, 3) = 2;
  e.at(2, 5) = 2;
  e.at(0, 6) = 1;
  EXPECT_EQ(viterbi(e, zero_transitions()).labels, (std::vector<std::size_t>{6, 0, 3}));
  EXPECT_EQ(brute_force_viterbi(e, zero_transitions()).labels,
            (std::vector<std::size_t>{6, 0, 3}));
}

TEST(Viterbi, NegativeTransitionAvoidsOToIPerson) {
  const auto O = index_of(Label::kO);
  const auto I = index_of(Label::kIPerson);
  // Emissions prefer O then I-Person; a strong penalty on O -> I-Person
  // forces the decoder to another path.
  Tensor e({2, kNumLabels}, -1.0);
  e.at(0, O) = 2.0;
  e.at(1, I) = 2.0;
  e.at(0, index_of(Label::kBPerson)) = 1.5;
  Tensor tr = zero_transitions();
  tr.at(O, I) = -100.0;
  auto r = viterbi(e, tr);
  EXPECT_FALSE(r.labels[0] == O && r.labels[1] == I);
  EXPECT_EQ(r.labels, (std::vector<std::size_t>{index_of(Label::kBPerson), I}));
}

TEST(Viterbi, PropertyBeatsRandomPaths) {
  Rng rng(8);
  Tensor e = random_tensor({6, kNumLabels}, rng, 2.0);
  Tensor tr = random_tensor({kCrfStates, kCrfStates}, rng, 2.0);
  const auto best = viterbi(e, tr);
  std::uniform_int_distribution<std::size_t> label(0, kNumLabels - 1);
  for (int k = 0; k < 1000; ++k) {
    std::vector<std::size_t> path(6);
    for (auto& y : path) y = label(rng);
    ASSERT_GE(best.score + 1e-12, crf_path_score(e, tr, path));
  }
}

}  // namespace
}  // namespace nesc
