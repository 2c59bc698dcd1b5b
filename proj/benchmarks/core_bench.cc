#include <benchmark/benchmark.h>

#include <random>

#include "nesc/crf.h"
#include "nesc/ner_model.h"
#include "nesc/nesc_model.h"

namespace {

using namespace nesc;

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

FeatureSequence random_features(std::size_t T, std::size_t d, Rng& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  FeatureSequence f(T, std::vector<double>(d));
  for (auto& row : f) {
    for (auto& v : row) v = dist(rng);
  }
  return f;
}

void BM_CrfLogPartition(benchmark::State& state) {
  Rng rng(1);
  const auto T = static_cast<std::size_t>(state.range(0));
  const auto e = random_tensor({T, kNumLabels}, rng);
  const auto tr = random_tensor({kCrfStates, kCrfStates}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(crf_log_partition(e, tr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CrfLogPartition)->Arg(5)->Arg(20)->Arg(50);

void BM_Viterbi(benchmark::State& state) {
  Rng rng(2);
  const auto T = static_cast<std::size_t>(state.range(0));
  const auto e = random_tensor({T, kNumLabels}, rng);
  const auto tr = random_tensor({kCrfStates, kCrfStates}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(e, tr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Viterbi)->Arg(5)->Arg(20)->Arg(50);

void BM_LstmCellForwardBackward(benchmark::State& state) {
  Rng rng(3);
  const auto H = static_cast<std::size_t>(state.range(0));
  const std::size_t d = kTokenDim;
  ParameterSet params;
  auto& w = params.add("w", random_tensor({4 * H, d + H}, rng));
  auto& b = params.add("b", Tensor({4 * H}));
  const auto x = random_tensor({d}, rng);
  for (auto _ : state) {
    Tape tape;
    auto h0 = tape.constant(Tensor({H}));
    auto s = lstm_cell(tape.constant(x), h0, h0, tape.parameter(w), tape.parameter(b));
    tape.backward(sum(s.h));
    benchmark::DoNotOptimize(tape.gradient_of(w));
  }
}
BENCHMARK(BM_LstmCellForwardBackward)->Arg(25)->Arg(100);

void BM_EncodeSequence(benchmark::State& state) {
  Rng rng(4);
  NerConfig cfg;
  const auto model = init_ner_model(cfg, rng);
  const auto x = random_features(static_cast<std::size_t>(state.range(0)), kTokenDim, rng);
  for (auto _ : state) benchmark::DoNotOptimize(encode_sequence(x, model));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncodeSequence)->Arg(10)->Arg(30);

void BM_NerLossBackward(benchmark::State& state) {
  Rng rng(5);
  NerConfig cfg;
  const auto model = init_ner_model(cfg, rng);
  const std::size_t T = 15;
  const auto x = random_features(T, kTokenDim, rng);
  std::vector<Label> gold(T, Label::kO);
  gold[3] = Label::kBPlace;
  gold[4] = Label::kIPlace;
  for (auto _ : state) {
    Tape tape;
    auto loss = ner_loss(tape, x, gold, model, true, &rng);
    tape.backward(loss);
    benchmark::DoNotOptimize(loss.value()[0]);
  }
}
BENCHMARK(BM_NerLossBackward);

void BM_NescScore(benchmark::State& state) {
  Rng rng(6);
  NescConfig cfg;
  const auto head = init_nesc_model(cfg, rng);
  const auto slice = random_tensor({static_cast<std::size_t>(state.range(0)), cfg.input_dim}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nesc_score(slice, head));
}
BENCHMARK(BM_NescScore)->Arg(5)->Arg(9);

}  // namespace

BENCHMARK_MAIN();
