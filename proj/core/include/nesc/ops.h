#pragma once

#include <cmath>
#include <span>

#include "nesc/tensor.h"

namespace nesc {

// Plain (non-recording) numeric kernels. The Var overloads in autodiff.h
// reuse these for their forward passes.

/// y = W x + b for W [m x n], x [n], b [m].
Tensor affine(const Tensor& weight, const Tensor& x, const Tensor& bias);

/// Max-shifted softmax; outputs sum to 1 and never overflow.
Tensor softmax(const Tensor& z);
Tensor log_softmax(const Tensor& z);

/// log(sum(exp(z))), max-shifted.
double log_sum_exp(std::span<const double> z);

inline double sigmoid(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace nesc
