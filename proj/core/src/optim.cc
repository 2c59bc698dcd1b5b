#include "nesc/optim.h"

#include <cmath>

#include "nesc/errors.h"

namespace nesc {

AdamState make_adam_state(const ParameterSet& params) {
  AdamState state;
  for (const auto& p : params) {
    state.first_moment.emplace_back(p.value.shape());
    state.second_moment.emplace_back(p.value.shape());
  }
  return state;
}

void adam_step(ParameterSet& params, AdamState& state, const AdamConfig& config) {
  if (!(config.learning_rate > 0)) throw UsageError("adam: learning rate must be > 0");
  if (state.first_moment.size() != params.size()) {
    throw UsageError("adam: state built for a different parameter set");
  }
  for (const auto& p : params) {
    if (!p.grad.all_finite()) {
      throw TrainingError("non-finite gradient in parameter block '" + p.name + "'");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);

  std::size_t k = 0;
  for (auto& p : params) {
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    require_same_shape(m, p.value, "adam");
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p.value[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
    ++k;
  }
}

double clip_global_norm(ParameterSet& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (double g : p.grad.data()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const double factor = max_norm / norm;
    for (auto& p : params) {
      for (auto& g : p.grad.values()) g *= factor;
    }
  }
  return norm;
}

void init_glorot_uniform(Tensor& matrix, Rng& rng) {
  const double fan_out = static_cast<double>(matrix.rows());
  const double fan_in = static_cast<double>(matrix.cols());
  const double r = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-r, r);
  for (auto& v : matrix.values()) v = dist(rng);
}

}  // namespace nesc
