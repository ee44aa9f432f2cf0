#include "hab/sac/policy.hpp"

#include <cmath>
#include <numbers>

#include "hab/errors.hpp"

namespace hab::sac {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

double log_one_minus_tanh_squared(double u) {
  return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
}

GaussianHead split_head(const Matrix& raw) {
  if (raw.rows() % 2 != 0) throw ShapeMismatch("actor output must hold mean and log-sigma");
  const Eigen::Index dims = raw.rows() / 2;
  GaussianHead head;
  head.mean = raw.topRows(dims);
  const Matrix log_sigma = raw.bottomRows(dims);
  head.log_sigma = log_sigma.cwiseMax(kLogSigmaMin).cwiseMin(kLogSigmaMax);
  head.clamp_active =
      ((log_sigma.array() < kLogSigmaMin) || (log_sigma.array() > kLogSigmaMax)).cast<double>();
  return head;
}

SquashedSample squash(const Matrix& mean, const Matrix& log_sigma, const Matrix& noise) {
  static const double kHalfLogTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);
  SquashedSample out;
  out.pre_tanh = mean.array() + log_sigma.array().exp() * noise.array();
  out.action = out.pre_tanh.array().tanh();
  out.log_prob = Vector::Zero(mean.cols());
  for (Eigen::Index b = 0; b < mean.cols(); ++b) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < mean.rows(); ++j) {
      const double eps = noise(j, b);
      total += -0.5 * eps * eps - log_sigma(j, b) - kHalfLogTwoPi -
               log_one_minus_tanh_squared(out.pre_tanh(j, b));
    }
    out.log_prob[b] = total;
  }
  return out;
}

ActionSample sample_action(const std::array<double, 3>& mean,
                           const std::array<double, 3>& log_sigma,
                           const std::array<double, 3>& noise) {
  const SquashedSample s = squash(Eigen::Map<const Matrix>(mean.data(), 3, 1),
                                  Eigen::Map<const Matrix>(log_sigma.data(), 3, 1),
                                  Eigen::Map<const Matrix>(noise.data(), 3, 1));
  return {{s.action(0, 0), s.action(1, 0), s.action(2, 0)}, s.log_prob[0]};
}

}  // namespace hab::sac
