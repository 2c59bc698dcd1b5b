#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nesc/ner_model.h"
#include "nesc/optim.h"
#include "nesc/tagset.h"

namespace nesc {

enum class Provenance : std::uint8_t { kPositive, kPerturbed, kRandom };

std::string_view provenance_name(Provenance p);
std::optional<Provenance> parse_provenance(std::string_view name);

/// One span-classification record. target is 1 iff the span is exactly a
/// gold entity span of its sentence.
struct NescSample {
  std::size_t sentence = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  int target = 0;
  Provenance provenance = Provenance::kPositive;

  friend bool operator==(const NescSample&, const NescSample&) = default;
};

/// Gold entity spans of a labeled sentence, one positive sample each.
std::vector<NescSample> extract_positives(std::span<const Label> labels, std::size_t sentence);

/// Shrink-left, shrink-right, shift-left, shift-right, extend-left and
/// extend-right of `span`, minus candidates that fall outside [0, n), are
/// empty, or coincide with any span in `gold`. Types are dropped.
std::vector<EntitySpan> perturb(const EntitySpan& span, std::size_t sentence_length,
                                std::span<const EntitySpan> gold);

/// Empirical pmf of gold entity lengths, in tokens.
class LengthDistribution {
 public:
  LengthDistribution() = default;
  static LengthDistribution from_counts(const std::map<std::size_t, std::size_t>& counts);
  // Rebuilds a persisted distribution; probabilities must sum to 1.
  static LengthDistribution from_pmf(std::span<const double> lengths,
                                     std::span<const double> probabilities);

  const std::map<std::size_t, double>& pmf() const { return pmf_; }
  double probability(std::size_t length) const;
  bool empty() const { return pmf_.empty(); }
  std::size_t sample(Rng& rng) const;

 private:
  std::map<std::size_t, double> pmf_;
};

// Throws DataError when the corpus holds no entities.
LengthDistribution fit_length_distribution(std::span<const std::vector<Label>> corpus);

/// Draws a length from `lengths` and a uniform start, rejecting spans equal to
/// a gold span (or longer than the sentence). Gives up after max_attempts
/// rejections.
std::optional<NescSample> sample_random_negative(std::size_t sentence,
                                                 std::size_t sentence_length,
                                                 std::span<const EntitySpan> gold,
                                                 const LengthDistribution& lengths, Rng& rng,
                                                 std::size_t max_attempts);

struct SamplerConfig {
  std::size_t random_negatives_per_sentence = 2;
  std::size_t max_attempts = 20;
  std::size_t context = 2;  // recorded with the dataset for train-time checks
};

struct NescDataset {
  std::vector<NescSample> samples;
  std::size_t context = 2;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  // w_neg = 1 and w_pos = negatives / positives.
  double positive_weight = 1.0;
  double negative_weight = 1.0;
};

void assign_class_weights(NescDataset& dataset);

// Per sentence: positives, then perturbations, then random negatives, each
// deduplicated on span keeping the first. Sentence s draws from an engine
// seeded by (seed, s), so output is independent of processing order.
NescDataset build_dataset(std::span<const std::vector<Label>> corpus,
                          const SamplerConfig& config, std::uint64_t seed);

// Tab-separated `sentence i j target provenance` per line, preceded by a
// `# context=<k>` line.
void write_dataset(std::ostream& out, const NescDataset& dataset);
NescDataset read_dataset(std::istream& in, std::string_view source);

}  // namespace nesc
