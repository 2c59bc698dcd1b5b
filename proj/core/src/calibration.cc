#include "nesc/calibration.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nesc/errors.h"

namespace nesc {

IsotonicCalibrator::IsotonicCalibrator(std::vector<double> thresholds, std::vector<double> values)
    : thresholds_(std::move(thresholds)), values_(std::move(values)) {
  if (thresholds_.empty() || thresholds_.size() != values_.size()) {
    throw UsageError("calibrator: need equal, non-empty knot arrays");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(thresholds_[k]) || !(values_[k] >= 0.0 && values_[k] <= 1.0)) {
      throw UsageError("calibrator: knot " + std::to_string(k) + " out of range");
    }
    if (k > 0 && (thresholds_[k] <= thresholds_[k - 1] || values_[k] < values_[k - 1])) {
      throw UsageError("calibrator: knots must ascend and values must not decrease");
    }
  }
}

double IsotonicCalibrator::operator()(double score) const {
  if (empty()) throw UsageError("calibrate: calibrator is not fitted");
  if (score <= thresholds_.front()) return values_.front();
  if (score >= thresholds_.back()) return values_.back();
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(thresholds_.begin(), thresholds_.end(), score) - thresholds_.begin());
  const std::size_t lo = hi - 1;
  const double frac = (score - thresholds_[lo]) / (thresholds_[hi] - thresholds_[lo]);
  return values_[lo] + frac * (values_[hi] - values_[lo]);
}

IsotonicCalibrator fit_pav(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty() || scores.size() != labels.size()) {
    throw UsageError("fit_pav: need equal, non-empty score and label arrays");
  }
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] != 0 && labels[k] != 1) throw UsageError("fit_pav: labels must be 0 or 1");
    if (!std::isfinite(scores[k])) throw UsageError("fit_pav: non-finite score");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  struct Block {
    double sum = 0;
    double weight = 0;
    std::size_t first = 0;  // index into `knots`
    double mean() const { return sum / weight; }
  };
  // Tied scores form one weighted point before any pooling.
  std::vector<double> knots;
  std::vector<Block> groups;
  for (std::size_t idx : order) {
    if (!knots.empty() && scores[idx] == knots.back()) {
      groups.back().sum += labels[idx];
      groups.back().weight += 1;
    } else {
      knots.push_back(scores[idx]);
      groups.push_back(Block{static_cast<double>(labels[idx]), 1.0, knots.size() - 1});
    }
  }
  std::vector<Block> blocks;
  for (const Block& g : groups) {
    blocks.push_back(g);
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      Block top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().weight += top.weight;
    }
  }

  std::vector<double> values(knots.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t stop = b + 1 < blocks.size() ? blocks[b + 1].first : knots.size();
    std::fill(values.begin() + static_cast<std::ptrdiff_t>(blocks[b].first),
              values.begin() + static_cast<std::ptrdiff_t>(stop), blocks[b].mean());
  }
  return IsotonicCalibrator(std::move(knots), std::move(values));
}

}  // namespace nesc
