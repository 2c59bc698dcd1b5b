#pragma once

#include <span>
#include <vector>

namespace nesc {

/// Monotone piecewise-linear score map. Knots are the distinct fitting
/// scores; values are their pooled label means.
class IsotonicCalibrator {
 public:
  IsotonicCalibrator() = default;
  // Validates: equal non-zero lengths, strictly ascending thresholds,
  // nondecreasing values in [0, 1].
  IsotonicCalibrator(std::vector<double> thresholds, std::vector<double> values);

  const std::vector<double>& thresholds() const { return thresholds_; }
  const std::vector<double>& values() const { return values_; }
  bool empty() const { return thresholds_.empty(); }

  // Linear interpolation between knots, clamped to the end values.
  double operator()(double score) const;

 private:
  std::vector<double> thresholds_;
  std::vector<double> values_;
};

/// Pool-adjacent-violators fit of binary labels against scores. Equal
/// scores are merged into one block before pooling.
IsotonicCalibrator fit_pav(std::span<const double> scores, std::span<const int> labels);

inline double calibrate(double score, const IsotonicCalibrator& calibrator) {
  return calibrator(score);
}

}  // namespace nesc
