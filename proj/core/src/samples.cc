#include "nesc/samples.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "nesc/errors.h"

namespace nesc {

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kPositive:
      return "positive";
    case Provenance::kPerturbed:
      return "perturbed";
    case Provenance::kRandom:
      return "random";
  }
  return "?";
}

std::optional<Provenance> parse_provenance(std::string_view name) {
  for (auto p : {Provenance::kPositive, Provenance::kPerturbed, Provenance::kRandom}) {
    if (provenance_name(p) == name) return p;
  }
  return std::nullopt;
}

namespace {

std::vector<EntitySpan> gold_spans(std::span<const Label> labels) {
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (index_of(labels[t]) >= kNumLabels) {
      throw DataError("malformed label value " + std::to_string(index_of(labels[t])) +
                      " at token " + std::to_string(t));
    }
  }
  return decode_spans(labels);
}

bool matches_any(std::size_t start, std::size_t end, std::span<const EntitySpan> gold) {
  return std::any_of(gold.begin(), gold.end(), [&](const EntitySpan& g) {
    return g.start == start && g.end == end;
  });
}

Rng sentence_rng(std::uint64_t seed, std::size_t sentence) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sentence),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(sentence) >> 32)};
  return Rng(seq);
}

}  // namespace

std::vector<NescSample> extract_positives(std::span<const Label> labels, std::size_t sentence) {
  std::vector<NescSample> out;
  for (const auto& span : gold_spans(labels)) {
    out.push_back(NescSample{sentence, span.start, span.end, 1, Provenance::kPositive});
  }
  return out;
}

std::vector<EntitySpan> perturb(const EntitySpan& span, std::size_t sentence_length,
                                std::span<const EntitySpan> gold) {
  const auto i = static_cast<std::ptrdiff_t>(span.start);
  const auto j = static_cast<std::ptrdiff_t>(span.end);
  const auto n = static_cast<std::ptrdiff_t>(sentence_length);
  const std::pair<std::ptrdiff_t, std::ptrdiff_t> candidates[] = {
      {i + 1, j},      // shrink left
      {i, j - 1},      // shrink right
      {i - 1, j - 1},  // shift left
      {i + 1, j + 1},  // shift right
      {i - 1, j},      // extend left
      {i, j + 1},      // extend right
  };
  std::vector<EntitySpan> out;
  for (auto [a, b] : candidates) {
    if (a < 0 || b >= n || a > b) continue;
    const auto s = static_cast<std::size_t>(a), e = static_cast<std::size_t>(b);
    if (matches_any(s, e, gold)) continue;
    out.push_back(EntitySpan{s, e, std::nullopt});
  }
  return out;
}

LengthDistribution LengthDistribution::from_counts(
    const std::map<std::size_t, std::size_t>& counts) {
  std::size_t total = 0;
  for (const auto& [len, c] : counts) total += c;
  if (total == 0) throw DataError("length distribution: no entities to count");
  LengthDistribution d;
  for (const auto& [len, c] : counts) {
    if (c > 0) d.pmf_[len] = static_cast<double>(c) / static_cast<double>(total);
  }
  return d;
}

LengthDistribution LengthDistribution::from_pmf(std::span<const double> lengths,
                                                std::span<const double> probabilities) {
  if (lengths.size() != probabilities.size() || lengths.empty()) {
    throw FormatError("length distribution: mismatched or empty arrays");
  }
  LengthDistribution d;
  double total = 0;
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    if (lengths[k] < 1 || lengths[k] != std::floor(lengths[k]) || probabilities[k] < 0) {
      throw FormatError("length distribution: invalid entry");
    }
    d.pmf_[static_cast<std::size_t>(lengths[k])] = probabilities[k];
    total += probabilities[k];
  }
  if (std::abs(total - 1.0) > 1e-9) throw FormatError("length distribution: pmf does not sum to 1");
  return d;
}

double LengthDistribution::probability(std::size_t length) const {
  auto it = pmf_.find(length);
  return it == pmf_.end() ? 0.0 : it->second;
}

std::size_t LengthDistribution::sample(Rng& rng) const {
  if (pmf_.empty()) throw UsageError("length distribution is empty");
  std::vector<double> weights;
  std::vector<std::size_t> lengths;
  for (const auto& [len, p] : pmf_) {
    lengths.push_back(len);
    weights.push_back(p);
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return lengths[pick(rng)];
}

LengthDistribution fit_length_distribution(std::span<const std::vector<Label>> corpus) {
  std::map<std::size_t, std::size_t> counts;
  for (const auto& labels : corpus) {
    for (const auto& span : gold_spans(labels)) ++counts[span.length()];
  }
  if (counts.empty()) throw DataError("cannot fit length distribution: corpus has no entities");
  return LengthDistribution::from_counts(counts);
}

std::optional<NescSample> sample_random_negative(std::size_t sentence,
                                                 std::size_t sentence_length,
                                                 std::span<const EntitySpan> gold,
                                                 const LengthDistribution& lengths, Rng& rng,
                                                 std::size_t max_attempts) {
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    const std::size_t len = lengths.sample(rng);
    if (len > sentence_length) continue;
    std::uniform_int_distribution<std::size_t> start_dist(0, sentence_length - len);
    const std::size_t start = start_dist(rng);
    const std::size_t end = start + len - 1;
    if (matches_any(start, end, gold)) continue;
    return NescSample{sentence, start, end, 0, Provenance::kRandom};
  }
  return std::nullopt;
}

void assign_class_weights(NescDataset& dataset) {
  dataset.positives = 0;
  dataset.negatives = 0;
  for (const auto& s : dataset.samples) (s.target == 1 ? dataset.positives : dataset.negatives)++;
  dataset.negative_weight = 1.0;
  dataset.positive_weight = dataset.positives > 0 && dataset.negatives > 0
                                ? static_cast<double>(dataset.negatives) /
                                      static_cast<double>(dataset.positives)
                                : 1.0;
}

NescDataset build_dataset(std::span<const std::vector<Label>> corpus,
                          const SamplerConfig& config, std::uint64_t seed) {
  if (corpus.empty()) throw DataError("build_dataset: empty corpus");
  const LengthDistribution lengths = fit_length_distribution(corpus);

  NescDataset dataset;
  dataset.context = config.context;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& labels = corpus[s];
    const auto gold = gold_spans(labels);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    auto keep = [&](NescSample sample) {
      if (seen.emplace(sample.start, sample.end).second) dataset.samples.push_back(sample);
    };

    for (const auto& g : gold) keep(NescSample{s, g.start, g.end, 1, Provenance::kPositive});
    for (const auto& g : gold) {
      for (const auto& p : perturb(g, labels.size(), gold)) {
        keep(NescSample{s, p.start, p.end, 0, Provenance::kPerturbed});
      }
    }
    if (labels.empty()) continue;
    Rng rng = sentence_rng(seed, s);
    for (std::size_t r = 0; r < config.random_negatives_per_sentence; ++r) {
      if (auto sample = sample_random_negative(s, labels.size(), gold, lengths, rng,
                                               config.max_attempts)) {
        keep(*sample);
      }
    }
  }
  assign_class_weights(dataset);
  return dataset;
}

void write_dataset(std::ostream& out, const NescDataset& dataset) {
  out << "# context=" << dataset.context << '\n';
  for (const auto& s : dataset.samples) {
    out << s.sentence << '\t' << s.start << '\t' << s.end << '\t' << s.target << '\t'
        << provenance_name(s.provenance) << '\n';
  }
}

NescDataset read_dataset(std::istream& in, std::string_view source) {
  NescDataset dataset;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto where = [&] { return std::string(source) + ":" + std::to_string(line_no); };
    if (line.front() == '#') {
      constexpr std::string_view key = "# context=";
      if (line.starts_with(key)) {
        try {
          dataset.context = std::stoul(line.substr(key.size()));
        } catch (const std::exception&) {
          throw DataError(where() + ": bad context header");
        }
      }
      continue;
    }
    std::istringstream fields(line);
    std::string sentence, start, end, target, provenance, extra;
    if (!std::getline(fields, sentence, '\t') || !std::getline(fields, start, '\t') ||
        !std::getline(fields, end, '\t') || !std::getline(fields, target, '\t') ||
        !std::getline(fields, provenance, '\t') || std::getline(fields, extra, '\t')) {
      throw DataError(where() + ": expected 5 tab-separated fields");
    }
    NescSample s;
    try {
      s.sentence = std::stoul(sentence);
      s.start = std::stoul(start);
      s.end = std::stoul(end);
      s.target = std::stoi(target);
    } catch (const std::exception&) {
      throw DataError(where() + ": non-numeric field");
    }
    auto prov = parse_provenance(provenance);
    if (!prov || (s.target != 0 && s.target != 1) || s.start > s.end ||
        (s.target == 1) != (*prov == Provenance::kPositive)) {
      throw DataError(where() + ": inconsistent target/provenance");
    }
    s.provenance = *prov;
    dataset.samples.push_back(s);
  }
  assign_class_weights(dataset);
  return dataset;
}

}  // namespace nesc
