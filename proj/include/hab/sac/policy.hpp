#pragma once

#include <array>

#include "hab/sac/mlp.hpp"

namespace hab::sac {

inline constexpr double kLogSigmaMin = -20.0;
inline constexpr double kLogSigmaMax = 2.0;

/// Gaussian head of the actor for a batch (each matrix is act_dim x B).
struct GaussianHead {
  Matrix mean;
  Matrix log_sigma;      // clamped to [-20, 2]
  Matrix clamp_active;   // 1 where the raw value was clamped (gradient blocked)
};

/// Splits the actor's (2 act_dim x B) output into mean and clamped log-sigma.
GaussianHead split_head(const Matrix& raw);

/// Reparameterised draw a = tanh(mu + sigma * eps) and its log-density.
struct SquashedSample {
  Matrix pre_tanh;  // u = mu + sigma * eps
  Matrix action;    // tanh(u)
  Vector log_prob;  // per column
};

/// log pi(a|s) = sum_j [log N(u_j; mu_j, sigma_j) - log(1 - tanh^2 u_j)], with
/// log(1 - tanh^2 u) = 2 (log 2 - u - softplus(-2u)) for numerical stability.
SquashedSample squash(const Matrix& mean, const Matrix& log_sigma, const Matrix& noise);

/// Single-action convenience form of squash().
struct ActionSample {
  std::array<double, 3> action;
  double log_prob;
};
ActionSample sample_action(const std::array<double, 3>& mean,
                           const std::array<double, 3>& log_sigma,
                           const std::array<double, 3>& noise);

/// log(1 - tanh(u)^2), stable for large |u|.
double log_one_minus_tanh_squared(double u);

}  // namespace hab::sac
