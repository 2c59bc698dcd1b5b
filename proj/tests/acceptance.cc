// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "nesc/bundle.h"
#include "nesc/calibration.h"
#include "nesc/corpus.h"
#include "nesc/crf.h"
#include "nesc/metrics.h"
#include "nesc/ner_model.h"
#include "nesc/nesc_model.h"
#include "nesc/pipeline.h"
#include "nesc/samples.h"
#include "support/support.h"

namespace {

using namespace nesc;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

FeatureSequence random_features(std::size_t T, std::size_t d, Rng& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  FeatureSequence f(T, std::vector<double>(d));
  for (auto& row : f) {
    for (auto& v : row) v = dist(rng);
  }
  return f;
}

NerModel tiny_ner(std::size_t H, std::size_t d, Rng& rng) {
  NerConfig cfg;
  cfg.hidden = H;
  cfg.input_dim = d;
  return init_ner_model(cfg, rng);
}

struct CrfInstance {
  Tensor emissions;
  Tensor transitions;
};

// Emissions from a random H=5 tagger over random features, with broad
// random transitions.
std::vector<CrfInstance> crf_instances() {
  Rng rng(2024);
  std::vector<CrfInstance> out;
  for (int n = 0; n < 200; ++n) {
    const std::size_t T = 1 + n % 4;
    auto model = tiny_ner(5, 7, rng);
    for (auto& v : model.params.get("dense.weight").value.values()) v *= 4.0;
    const auto e = emission_matrix(encode_sequence(random_features(T, 7, rng), model), model);
    out.push_back({e, testing::random_tensor({kCrfStates, kCrfStates}, rng, 2.0)});
  }
  return out;
}

Outcome crf_oracle() {
  const auto start = Clock::now();
  double worst_z = 0, worst_norm = 0;
  for (const auto& inst : crf_instances()) {
    const std::size_t T = inst.emissions.rows();
    const double oracle = testing::brute_force_log_partition(inst.emissions, inst.transitions);
    // log Z recovered from the loss of an arbitrary gold path.
    const std::vector<std::size_t> gold(T, 2);
    const double from_nll = crf_nll(inst.emissions, inst.transitions, gold) +
                            crf_path_score(inst.emissions, inst.transitions, gold);
    worst_z = std::max({worst_z, std::abs(from_nll - oracle),
                        std::abs(crf_log_partition(inst.emissions, inst.transitions) - oracle)});
    if (T <= 3) {
      long double total = 0;
      for (const auto& path : testing::all_label_paths(T)) {
        total += std::exp(static_cast<long double>(-crf_nll(inst.emissions, inst.transitions, path)));
      }
      worst_norm = std::max(worst_norm, std::abs(static_cast<double>(total) - 1.0));
    }
  }
  const double secs = seconds_since(start);
  return {worst_z <= 1e-8 && worst_norm <= 1e-8 && secs < 120,
          "max |logZ - enum| " + num(worst_z) + ", max |sum p - 1| " + num(worst_norm) + ", " +
              num(secs) + " s"};
}

Outcome viterbi_oracle() {
  double worst = 0;
  std::size_t path_mismatch = 0;
  for (const auto& inst : crf_instances()) {
    const auto fast = viterbi(inst.emissions, inst.transitions);
    const auto slow = testing::brute_force_viterbi(inst.emissions, inst.transitions);
    worst = std::max(worst, std::abs(fast.score - slow.score));
    path_mismatch += fast.labels != slow.labels;
  }
  // Exact ties exercise the lowest-index rule.
  Tensor flat({3, kNumLabels});
  const auto tied = viterbi(flat, Tensor({kCrfStates, kCrfStates}));
  path_mismatch += tied.labels != testing::brute_force_viterbi(flat, Tensor({kCrfStates, kCrfStates})).labels;
  path_mismatch += tied.labels != std::vector<std::size_t>{0, 0, 0};
  return {worst <= 1e-10 && path_mismatch == 0,
          "max score diff " + num(worst) + ", path mismatches " + std::to_string(path_mismatch)};
}

Outcome gradient_suite() {
  Rng rng(7);
  auto ner = tiny_ner(5, 6, rng);
  for (auto& p : ner.params) {
    for (auto& v : p.value.values()) v += std::uniform_real_distribution<double>(-0.3, 0.3)(rng);
  }
  const auto x = random_features(3, 6, rng);
  const std::vector<Label> gold{Label::kBPerson, Label::kIPerson, Label::kO};
  double worst = 0;
  std::string worst_name;
  auto track = [&](const std::vector<testing::BlockError>& errors, const std::string& prefix) {
    for (const auto& e : errors) {
      if (e.relative > worst || worst_name.empty()) {
        worst = std::max(worst, e.relative);
        worst_name = prefix + e.name;
      }
    }
  };
  track(testing::gradient_check(ner.params,
                                [&](Tape& t) { return ner_loss(t, x, gold, ner, false, nullptr); }),
        "ner.");

  NescConfig nc;
  nc.hidden = 5;
  nc.input_dim = 10;
  auto head = init_nesc_model(nc, rng);
  head.positive_weight = 3.0;
  const auto slice = testing::random_tensor({4, 10}, rng);
  for (int target : {0, 1}) {
    track(testing::gradient_check(head.params,
                                  [&](Tape& t) { return nesc_loss(t, slice, target, head); }),
          "nesc.");
  }
  return {worst < 1e-4, "worst block " + worst_name + " rel err " + num(worst)};
}

Outcome memorization() {
  const auto corpus = testing::synthetic_corpus(50, 1);
  const auto table = EmbeddingTable::hashed(1);
  const auto data = labeled_sequences(corpus, table);
  NerConfig cfg;
  cfg.epochs = 100;
  Rng rng(42);
  const auto start = Clock::now();
  const auto result = train_ner(data, cfg, rng);
  const double secs = seconds_since(start);
  PRF typed;
  for (const auto& s : data) {
    typed += entity_prf(decode_spans(s.labels), tag(s.features, result.model).spans, true);
  }
  return {typed.f1() >= 0.95 && secs < 300,
          "typed F1 " + num(typed.f1()) + " after 100 epochs, " + num(secs) + " s"};
}

Outcome nesc_separability() {
  // Windows of a 2-token span with context 2, in a 2H = 200 encoder space.
  const auto train = testing::separable_windows(400, 6, 200, 31);
  const auto held_out = testing::separable_windows(200, 6, 200, 32);
  NescConfig cfg;
  cfg.input_dim = 200;
  Rng rng(33);
  const auto model = train_nesc_head(train, cfg, 1.0, 1.0, rng).model;
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& ex : held_out) {
    scores.push_back(nesc_score(ex.slice, model));
    labels.push_back(ex.target);
  }
  const double auc = roc_auc(scores, labels);
  return {auc >= 0.95, "held-out ROC-AUC " + num(auc)};
}

Outcome sampler_fidelity() {
  // "homeless population in San Francisco is surging", San Francisco = (3, 4).
  const EntitySpan sf{3, 4, EntityType::kPlace};
  const std::vector<EntitySpan> gold{sf};
  const auto out = perturb(sf, 7, gold);
  std::size_t found = 0;
  for (auto [a, b] : {std::pair<std::size_t, std::size_t>{4, 4}, {3, 3}, {2, 3}, {4, 5}}) {
    found += std::any_of(out.begin(), out.end(),
                         [&](const EntitySpan& s) { return s.start == a && s.end == b; });
  }

  const auto corpus = corpus_labels(testing::synthetic_corpus(200, 11));
  const auto lengths = fit_length_distribution(corpus);
  Rng rng(12);
  std::size_t collisions = 0, accepted = 0;
  for (int draw = 0; draw < 10000; ++draw) {
    const auto& labels = corpus[draw % corpus.size()];
    const auto spans = decode_spans(labels);
    if (auto s = sample_random_negative(0, labels.size(), spans, lengths, rng, 20)) {
      ++accepted;
      for (const auto& g : spans) collisions += g.start == s->start && g.end == s->end;
    }
  }
  return {found == 4 && collisions == 0,
          std::to_string(found) + "/4 table spans, " + std::to_string(collisions) +
              " collisions in " + std::to_string(accepted) + " accepted draws"};
}

Outcome calibration() {
  Rng rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_oracle = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t n = 1 + trial % 8;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t k = 0; k < n; ++k) {
      scores[k] = trial % 2 ? u(rng) : static_cast<double>(rng() % 5) / 4.0;
      labels[k] = static_cast<int>(rng() % 2);
    }
    const auto cal = fit_pav(scores, labels);
    const auto oracle = testing::brute_force_isotonic(scores, labels);
    for (std::size_t k = 0; k < n; ++k) {
      worst_oracle = std::max(worst_oracle, std::abs(cal(scores[k]) - oracle[k]));
    }
  }

  std::vector<double> fit_scores(100);
  std::vector<int> fit_labels(100);
  for (std::size_t k = 0; k < 100; ++k) {
    fit_scores[k] = u(rng);
    fit_labels[k] = u(rng) < fit_scores[k] * fit_scores[k];
  }
  const auto cal = fit_pav(fit_scores, fit_labels);
  std::size_t violations = 0;
  for (int pair = 0; pair < 10000; ++pair) {
    double a = u(rng) * 1.2 - 0.1, b = u(rng) * 1.2 - 0.1;
    if (a > b) std::swap(a, b);
    violations += cal(a) > cal(b);
  }

  std::size_t mse_worse = 0;
  for (int set = 0; set < 500; ++set) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t k = 0; k < n; ++k) {
      scores[k] = u(rng);
      labels[k] = u(rng) < 0.5;
    }
    const auto c = fit_pav(scores, labels);
    double raw = 0, fitted = 0;
    for (std::size_t k = 0; k < n; ++k) {
      raw += (scores[k] - labels[k]) * (scores[k] - labels[k]);
      fitted += (c(scores[k]) - labels[k]) * (c(scores[k]) - labels[k]);
    }
    mse_worse += fitted / n > raw / n + 1e-12;
  }
  return {worst_oracle <= 1e-6 && violations == 0 && mse_worse == 0,
          "max |PAV - oracle| " + num(worst_oracle) + ", monotonicity violations " +
              std::to_string(violations) + ", sets with worse MSE " + std::to_string(mse_worse)};
}

Outcome metrics_oracle() {
  Rng rng(41);
  std::size_t mismatches = 0;
  for (int s = 0; s < 1000; ++s) {
    const std::size_t n = 1 + rng() % 20;
    const auto gold = testing::random_labels(n, rng);
    const auto pred = testing::random_labels(n, rng);
    const auto t = token_prf(gold, pred);
    const auto a = testing::oracle_token_counts(gold, pred);
    mismatches += t.tp != a.tp || t.fp != a.fp || t.fn != a.fn;
    for (bool typed : {false, true}) {
      const auto e = entity_prf(decode_spans(gold), decode_spans(pred), typed);
      const auto b = testing::oracle_entity_counts(gold, pred, typed);
      mismatches += e.tp != b.tp || e.fp != b.fp || e.fn != b.fn;
    }
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores(500);
  std::vector<int> labels(500);
  for (std::size_t k = 0; k < 500; ++k) {
    scores[k] = u(rng);
    labels[k] = u(rng) < scores[k];
  }
  const auto curve = pr_curve(scores, labels, default_thresholds());
  std::size_t increases = 0;
  for (std::size_t k = 1; k < curve.size(); ++k) increases += curve[k].recall > curve[k - 1].recall;
  return {mismatches == 0 && increases == 0,
          std::to_string(mismatches) + " oracle mismatches over 1000 sentences, " +
              std::to_string(increases) + " recall increases over " +
              std::to_string(curve.size()) + " thresholds"};
}

std::string training_artifacts(std::uint64_t seed) {
  const auto corpus = testing::synthetic_corpus(20, 51);
  ModelBundle bundle;
  bundle.config.ner.hidden = 12;
  bundle.config.ner.epochs = 3;
  bundle.config.nesc.hidden = 6;
  bundle.config.nesc.epochs = 2;
  bundle.config.nesc.input_dim = 24;
  bundle.hashed_embedding_seed = seed;
  const auto table = EmbeddingTable::hashed(seed);
  Rng rng(seed);
  bundle.ner = train_ner(labeled_sequences(corpus, table), bundle.config.ner, rng).model;
  const auto d = build_dataset(corpus_labels(corpus), bundle.config.sampler, seed);
  bundle.nesc = train_nesc(d, corpus, table, bundle.ner, bundle.config.nesc, rng).model;
  bundle.lengths = fit_length_distribution(corpus_labels(corpus));
  std::ostringstream out;
  write_dataset(out, d);
  write_bundle(out, bundle);
  return out.str();
}

Outcome determinism_and_persistence() {
  const auto a = training_artifacts(5), b = training_artifacts(5), c = training_artifacts(6);
  const bool identical = a == b;
  const bool seed_matters = a != c;

  const auto corpus = testing::synthetic_corpus(10, 52);
  const auto table = EmbeddingTable::hashed(5);
  ModelBundle bundle;
  bundle.config.ner.hidden = 8;
  bundle.config.nesc.hidden = 4;
  bundle.config.nesc.input_dim = 16;
  bundle.config.ner.epochs = 2;
  bundle.config.nesc.epochs = 2;
  bundle.hashed_embedding_seed = 5;
  Rng rng(53);
  bundle.ner = train_ner(labeled_sequences(corpus, table), bundle.config.ner, rng).model;
  const auto d = build_dataset(corpus_labels(corpus), bundle.config.sampler, 54);
  bundle.nesc = train_nesc(d, corpus, table, bundle.ner, bundle.config.nesc, rng).model;
  const auto enc = encode_corpus(corpus, table, bundle.ner);
  const auto raw = score_dataset(d, enc, *bundle.nesc);
  bundle.calibrator = fit_pav(raw, dataset_targets(d));

  std::stringstream buf;
  write_bundle(buf, bundle);
  const auto back = read_bundle(buf);
  const auto back_table = resolve_embeddings(back, std::nullopt);
  std::size_t probes = 0, differing = 0;
  for (const auto& s : corpus.sentences) {
    const auto f1 = featurize(s, table), f2 = featurize(s, back_table);
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i; j < std::min(s.size(), i + 3); ++j) {
        const EntitySpan span{i, j, std::nullopt};
        ++probes;
        differing += score_span(f1, span, bundle.ner, *bundle.nesc, &bundle.calibrator) !=
                     score_span(f2, span, back.ner, *back.nesc, &back.calibrator);
      }
    }
  }
  return {identical && seed_matters && differing == 0,
          std::string("same-seed outputs ") + (identical ? "byte-identical" : "DIFFER") +
              ", other seed " + (seed_matters ? "differs" : "SAME") + ", " +
              std::to_string(differing) + "/" + std::to_string(probes) +
              " probe scores changed after reload"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"crf-oracle-equivalence", crf_oracle},
      {"viterbi-oracle-equivalence", viterbi_oracle},
      {"gradient-suite", gradient_suite},
      {"memorization", memorization},
      {"nesc-separability", nesc_separability},
      {"sampler-fidelity", sampler_fidelity},
      {"calibration", calibration},
      {"metrics-oracle", metrics_oracle},
      {"determinism-and-persistence", determinism_and_persistence},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
