#include "nesc/ops.h"

#include <algorithm>
#include <cmath>

#include "nesc/errors.h"

namespace nesc {

Tensor affine(const Tensor& weight, const Tensor& x, const Tensor& bias) {
  if (weight.rank() != 2 || x.rank() != 1 || bias.rank() != 1 ||
      weight.cols() != x.size() || weight.rows() != bias.size()) {
    throw DimensionError("affine: W " + shape_string(weight.shape()) + ", x " +
                         shape_string(x.shape()) + ", b " +
                         shape_string(bias.shape()));
  }
  const std::size_t m = weight.rows(), n = weight.cols();
  Tensor y = bias;
  const double* w = weight.data().data();
  const double* xv = x.data().data();
  for (std::size_t r = 0; r < m; ++r) {
    double acc = 0.0;
    const double* wr = w + r * n;
    for (std::size_t c = 0; c < n; ++c) acc += wr[c] * xv[c];
    y[r] += acc;
  }
  return y;
}

double log_sum_exp(std::span<const double> z) {
  if (z.empty()) throw DimensionError("log_sum_exp: empty input");
  const double mx = *std::max_element(z.begin(), z.end());
  if (std::isinf(mx)) return mx;
  double total = 0.0;
  for (double v : z) total += std::exp(v - mx);
  return mx + std::log(total);
}

Tensor log_softmax(const Tensor& z) {
  if (z.empty()) throw DimensionError("log_softmax: empty input");
  const double lse = log_sum_exp(z.data());
  Tensor out = z;
  for (auto& v : out.values()) v -= lse;
  return out;
}

Tensor softmax(const Tensor& z) {
  if (z.empty()) throw DimensionError("softmax: empty input");
  const double mx = *std::max_element(z.data().begin(), z.data().end());
  Tensor out = z;
  double total = 0.0;
  for (auto& v : out.values()) {
    v = std::exp(v - mx);
    total += v;
  }
  for (auto& v : out.values()) v /= total;
  return out;
}

}  // namespace nesc
