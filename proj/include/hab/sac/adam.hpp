#pragma once

#include "hab/sac/mlp.hpp"

namespace hab::sac {

/// Adaptive moment estimation with bias correction.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);

  /// params <- params - lr * m_hat / (sqrt(v_hat) + eps)
  void step(Vector& params, const Vector& grad);

  long steps() const { return steps_; }

  /// Moment estimates and bias-correction powers, for checkpoints.
  struct State {
    long steps = 0;
    double beta1_power = 1.0;
    double beta2_power = 1.0;
    Vector first_moment;
    Vector second_moment;
  };
  State state() const;
  void restore(const State& state);

 private:
  double learning_rate_ = 0.0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double epsilon_ = 1e-8;
  double beta1_power_ = 1.0;
  double beta2_power_ = 1.0;
  long steps_ = 0;
  Vector first_moment_;
  Vector second_moment_;
};

}  // namespace hab::sac
