#include "nesc/metrics.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "nesc/errors.h"

namespace nesc {

double PRF::precision() const {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double PRF::recall() const {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double PRF::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

PRF& PRF::operator+=(const PRF& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

PRF token_prf(std::span<const Label> gold, std::span<const Label> predicted) {
  if (gold.size() != predicted.size()) {
    throw UsageError("token_prf: " + std::to_string(gold.size()) + " gold vs " +
                     std::to_string(predicted.size()) + " predicted labels");
  }
  PRF out;
  for (std::size_t t = 0; t < gold.size(); ++t) {
    const bool g = gold[t] != Label::kO;
    const bool p = predicted[t] != Label::kO;
    if (g && p) ++out.tp;
    if (!g && p) ++out.fp;
    if (g && !p) ++out.fn;
  }
  return out;
}

PRF entity_prf(std::span<const EntitySpan> gold, std::span<const EntitySpan> predicted,
               bool typed) {
  for (std::size_t a = 0; a < gold.size(); ++a) {
    for (std::size_t b = a + 1; b < gold.size(); ++b) {
      if (gold[a].start <= gold[b].end && gold[b].start <= gold[a].end) {
        throw DataError("entity_prf: overlapping gold spans");
      }
    }
  }
  // Non-overlapping gold spans have distinct ranges, so each prediction can
  // match at most one of them.
  std::vector<bool> used(gold.size(), false);
  PRF out;
  for (const auto& p : predicted) {
    bool hit = false;
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (used[g] || !gold[g].same_range(p)) continue;
      if (typed && gold[g].type != p.type) continue;
      used[g] = true;
      hit = true;
      break;
    }
    hit ? ++out.tp : ++out.fp;
  }
  out.fn = gold.size() - out.tp;
  return out;
}

std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const int> labels,
                              std::span<const double> thresholds) {
  if (scores.size() != labels.size()) {
    throw UsageError("pr_curve: scores and labels differ in length");
  }
  std::vector<PrPoint> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    PRF c;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      const bool p = scores[k] >= t;
      const bool g = labels[k] == 1;
      if (p && g) ++c.tp;
      if (p && !g) ++c.fp;
      if (!p && g) ++c.fn;
    }
    curve.push_back(PrPoint{t, c.precision(), c.recall()});
  }
  return curve;
}

std::vector<double> default_thresholds() {
  std::vector<double> out;
  for (int k = 0; k <= 100; ++k) out.push_back(k / 100.0);
  return out;
}

void write_pr_csv(std::ostream& out, std::span<const PrPoint> curve) {
  out << "threshold,precision,recall\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%g,%.6f,%.6f\n", p.threshold, p.precision, p.recall);
    out << buf;
  }
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw UsageError("roc_auc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U with midranks for ties.
  double rank_sum = 0;
  std::size_t positives = 0;
  for (std::size_t k = 0; k < order.size();) {
    std::size_t m = k;
    while (m < order.size() && scores[order[m]] == scores[order[k]]) ++m;
    const double midrank = (static_cast<double>(k + 1) + static_cast<double>(m)) / 2.0;
    for (std::size_t q = k; q < m; ++q) {
      if (labels[order[q]] == 1) {
        rank_sum += midrank;
        ++positives;
      }
    }
    k = m;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) throw UsageError("roc_auc: need both classes");
  const double p = static_cast<double>(positives), n = static_cast<double>(negatives);
  return (rank_sum - p * (p + 1) / 2.0) / (p * n);
}

}  // namespace nesc
