#include "support.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <random>

namespace nesc::testing {

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), 1e-12);
}

std::vector<BlockError> gradient_check(ParameterSet& params,
                                       const std::function<Var(Tape&)>& build, double h) {
  {
    Tape tape;
    Var loss = build(tape);
    tape.backward(loss);
    tape.collect_gradients(params);
  }
  auto evaluate = [&] {
    Tape tape;
    return build(tape).value()[0];
  };

  std::vector<BlockError> out;
  for (auto& p : params) {
    std::vector<double> numeric(p.value.size());
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + h;
      const double up = evaluate();
      p.value[i] = saved - h;
      const double down = evaluate();
      p.value[i] = saved;
      numeric[i] = (up - down) / (2 * h);
    }
    out.push_back({p.name, relative_error(p.grad.data(), numeric)});
  }
  return out;
}

std::vector<std::vector<std::size_t>> all_label_paths(std::size_t length) {
  std::vector<std::vector<std::size_t>> paths{{}};
  for (std::size_t t = 0; t < length; ++t) {
    std::vector<std::vector<std::size_t>> next;
    next.reserve(paths.size() * kNumLabels);
    for (const auto& p : paths) {
      for (std::size_t y = 0; y < kNumLabels; ++y) {
        next.push_back(p);
        next.back().push_back(y);
      }
    }
    paths = std::move(next);
  }
  return paths;
}

namespace {

// Independent of crf_path_score: plain loop over the path.
double score_path(const Tensor& e, const Tensor& tr, const std::vector<std::size_t>& path) {
  double s = tr.at(kStartState, path.front()) + tr.at(path.back(), kEndState);
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += e.at(t, path[t]);
    if (t) s += tr.at(path[t - 1], path[t]);
  }
  return s;
}

}  // namespace

double brute_force_log_partition(const Tensor& emissions, const Tensor& transitions) {
  const auto paths = all_label_paths(emissions.rows());
  std::vector<double> scores;
  scores.reserve(paths.size());
  for (const auto& p : paths) scores.push_back(score_path(emissions, transitions, p));
  const double mx = *std::max_element(scores.begin(), scores.end());
  long double total = 0;
  for (double s : scores) total += std::exp(static_cast<long double>(s - mx));
  return mx + static_cast<double>(std::log(total));
}

ViterbiResult brute_force_viterbi(const Tensor& emissions, const Tensor& transitions) {
  ViterbiResult best;
  best.score = -std::numeric_limits<double>::infinity();
  for (const auto& p : all_label_paths(emissions.rows())) {
    const double s = score_path(emissions, transitions, p);
    bool take = s > best.score;
    if (s == best.score) {
      take = std::lexicographical_compare(p.rbegin(), p.rend(), best.labels.rbegin(),
                                          best.labels.rend());
    }
    if (take) best = ViterbiResult{p, s};
  }
  return best;
}

Tensor random_tensor(Shape shape, Rng& rng, double scale) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

Corpus synthetic_corpus(std::size_t sentences, std::uint64_t seed) {
  struct Entity {
    std::vector<std::string> tokens;
    EntityType type;
  };
  const std::vector<Entity> gazetteer = {
      {{"Alice", "Moreno"}, EntityType::kPerson},
      {{"Russell", "Wilson"}, EntityType::kPerson},
      {{"Calum"}, EntityType::kPerson},
      {{"San", "Francisco"}, EntityType::kPlace},
      {{"Paris"}, EntityType::kPlace},
      {{"Long", "Island"}, EntityType::kPlace},
      {{"Galaxy", "Note"}, EntityType::kProduct},
      {{"Xbox"}, EntityType::kProduct},
      {{"Seahawks"}, EntityType::kOrganization},
      {{"Red", "Cross"}, EntityType::kOrganization},
      {{"FDA"}, EntityType::kOrganization},
      {{"Veterans", "Day"}, EntityType::kOther},
      {{"World", "Cup"}, EntityType::kOther},
  };
  const std::vector<std::pair<std::string, Pos>> filler = {
      {"i", Pos::kPron},      {"love", Pos::kVerb},  {"the", Pos::kDet},   {"visit", Pos::kVerb},
      {"today", Pos::kNoun},  {"in", Pos::kAdp},     {"with", Pos::kAdp},  {"and", Pos::kCconj},
      {"my", Pos::kPron},     {"new", Pos::kAdj},    {"was", Pos::kAux},   {"at", Pos::kAdp},
      {"great", Pos::kAdj},   {"see", Pos::kVerb},   {"going", Pos::kVerb}, {"to", Pos::kPart},
      {"from", Pos::kAdp},    {"!", Pos::kPunct},    {"so", Pos::kAdv},    {"game", Pos::kNoun},
  };

  Rng rng(seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  Corpus corpus;
  for (std::size_t s = 0; s < sentences; ++s) {
    Sentence sentence;
    const std::size_t entities = 1 + pick(2);
    auto add_filler = [&](std::size_t count) {
      for (std::size_t k = 0; k < count; ++k) {
        const auto& [word, pos] = filler[pick(filler.size())];
        sentence.tokens.push_back(word);
        sentence.pos.push_back(pos);
        sentence.labels.push_back(Label::kO);
      }
    };
    add_filler(1 + pick(3));
    for (std::size_t e = 0; e < entities; ++e) {
      const auto& ent = gazetteer[pick(gazetteer.size())];
      for (std::size_t k = 0; k < ent.tokens.size(); ++k) {
        sentence.tokens.push_back(ent.tokens[k]);
        sentence.pos.push_back(Pos::kPropn);
        sentence.labels.push_back(k == 0 ? begin_label(ent.type) : inside_label(ent.type));
      }
      add_filler(1 + pick(3));
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

}  // namespace nesc::testing

namespace nesc::testing {

std::vector<WindowExample> separable_windows(std::size_t count, std::size_t length,
                                             std::size_t width, std::uint64_t seed,
                                             double noise) {
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(-noise, noise);
  std::vector<WindowExample> out;
  for (std::size_t n = 0; n < count; ++n) {
    const int target = static_cast<int>(n % 2);
    Tensor slice({length, width});
    for (std::size_t r = 0; r < length; ++r) {
      slice.at(r, 0) = target ? 1.0 : -1.0;
      for (std::size_t c = 1; c < width; ++c) slice.at(r, c) = dist(rng);
    }
    out.push_back({std::move(slice), target});
  }
  return out;
}

}  // namespace nesc::testing

namespace nesc::testing {

std::vector<double> brute_force_isotonic(std::span<const double> scores,
                                         std::span<const int> labels) {
  std::map<double, std::pair<double, double>> groups;  // score -> (label sum, count)
  for (std::size_t k = 0; k < scores.size(); ++k) {
    groups[scores[k]].first += labels[k];
    groups[scores[k]].second += 1;
  }
  std::vector<double> sums, counts, keys;
  for (const auto& [s, g] : groups) {
    keys.push_back(s);
    sums.push_back(g.first);
    counts.push_back(g.second);
  }
  const std::size_t m = keys.size();
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  // Bit b set means a block boundary after group b.
  for (std::uint32_t cuts = 0; cuts < (1u << (m - 1)); ++cuts) {
    std::vector<double> fit(m);
    double prev = -1, sse = 0;
    bool monotone = true;
    std::size_t begin = 0;
    for (std::size_t g = 0; g < m; ++g) {
      if (g + 1 < m && !(cuts >> g & 1u)) continue;
      double s = 0, c = 0;
      for (std::size_t q = begin; q <= g; ++q) s += sums[q], c += counts[q];
      const double mean = s / c;
      if (mean < prev - 1e-15) monotone = false;
      prev = mean;
      for (std::size_t q = begin; q <= g; ++q) fit[q] = mean;
      begin = g + 1;
    }
    if (!monotone) continue;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      const auto g = static_cast<std::size_t>(
          std::lower_bound(keys.begin(), keys.end(), scores[k]) - keys.begin());
      sse += (fit[g] - labels[k]) * (fit[g] - labels[k]);
    }
    if (sse < best_sse - 1e-15) {
      best_sse = sse;
      best = fit;
    }
  }
  std::vector<double> out;
  for (double s : scores) {
    out.push_back(best[static_cast<std::size_t>(std::lower_bound(keys.begin(), keys.end(), s) -
                                                keys.begin())]);
  }
  return out;
}

SetCounts oracle_token_counts(std::span<const Label> gold, std::span<const Label> predicted) {
  std::set<std::size_t> g, p;
  for (std::size_t t = 0; t < gold.size(); ++t) {
    if (label_name(gold[t]) != "O") g.insert(t);
    if (label_name(predicted[t]) != "O") p.insert(t);
  }
  SetCounts c;
  for (auto t : p) (g.count(t) ? c.tp : c.fp)++;
  for (auto t : g) c.fn += !p.count(t);
  return c;
}

namespace {

using SpanKey = std::tuple<std::size_t, std::size_t, std::string>;

// Reads spans from label names: "B-X" opens, "I-X" continues an open X or
// opens a new X entity, anything else closes.
std::set<SpanKey> scan_spans(std::span<const Label> labels, bool typed) {
  std::set<SpanKey> out;
  std::string open_type;
  std::size_t open_start = 0;
  auto close = [&](std::size_t end) {
    if (!open_type.empty()) out.emplace(open_start, end, typed ? open_type : "");
    open_type.clear();
  };
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const std::string name(label_name(labels[t]));
    if (name == "O") {
      close(t - 1);
      continue;
    }
    const std::string prefix = name.substr(0, 2), type = name.substr(2);
    if (prefix == "I-" && open_type == type) continue;
    if (t > 0) close(t - 1);
    open_type = type;
    open_start = t;
  }
  if (!labels.empty()) close(labels.size() - 1);
  return out;
}

}  // namespace

SetCounts oracle_entity_counts(std::span<const Label> gold, std::span<const Label> predicted,
                               bool typed) {
  const auto g = scan_spans(gold, typed), p = scan_spans(predicted, typed);
  SetCounts c;
  for (const auto& s : p) (g.count(s) ? c.tp : c.fp)++;
  for (const auto& s : g) c.fn += !p.count(s);
  return c;
}

std::vector<Label> random_labels(std::size_t length, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, kNumLabels - 1);
  std::bernoulli_distribution outside(0.5);
  std::vector<Label> out(length);
  for (auto& l : out) l = outside(rng) ? Label::kO : label_at(pick(rng));
  return out;
}

}  // namespace nesc::testing
