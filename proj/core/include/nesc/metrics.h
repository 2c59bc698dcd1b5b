#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "nesc/ner_model.h"
#include "nesc/tagset.h"

namespace nesc {

/// Precision/recall/F1 from raw counts. An empty denominator yields 1 for
/// precision or recall; F1 is 0 when both are 0.
struct PRF {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;

  PRF& operator+=(const PRF& other);
};

/// Entity-vs-O per token; entity types and B/I distinctions are ignored.
PRF token_prf(std::span<const Label> gold, std::span<const Label> predicted);

/// Exact (start, end) matching, one-to-one, optionally also on type.
/// Throws DataError when gold spans overlap.
PRF entity_prf(std::span<const EntitySpan> gold, std::span<const EntitySpan> predicted,
               bool typed);

struct PrPoint {
  double threshold = 0;
  double precision = 1;
  double recall = 1;
};

/// Predict positive iff score >= threshold, at each threshold.
std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const int> labels,
                              std::span<const double> thresholds);

// 0.00, 0.01, ..., 1.00.
std::vector<double> default_thresholds();

void write_pr_csv(std::ostream& out, std::span<const PrPoint> curve);

/// Area under the ROC curve, ties counted as one half. Requires at least one
/// sample of each class.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace nesc
