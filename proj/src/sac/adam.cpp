#include "hab/sac/adam.hpp"

#include "hab/errors.hpp"

namespace hab::sac {

Adam::Adam(Eigen::Index size, double learning_rate, double beta1, double beta2, double epsilon)
    : learning_rate_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      first_moment_(Vector::Zero(size)),
      second_moment_(Vector::Zero(size)) {}

void Adam::step(Vector& params, const Vector& grad) {
  if (params.size() != first_moment_.size() || grad.size() != first_moment_.size()) {
    throw ShapeMismatch("Adam state, parameters and gradient sizes differ");
  }
  ++steps_;
  beta1_power_ *= beta1_;
  beta2_power_ *= beta2_;
  first_moment_ = beta1_ * first_moment_ + (1.0 - beta1_) * grad;
  second_moment_ = beta2_ * second_moment_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double step_size = learning_rate_ / (1.0 - beta1_power_);
  const double v_correction = 1.0 / (1.0 - beta2_power_);
  params.array() -= step_size * first_moment_.array() /
                    ((second_moment_.array() * v_correction).sqrt() + epsilon_);
}

Adam::State Adam::state() const {
  return {steps_, beta1_power_, beta2_power_, first_moment_, second_moment_};
}

void Adam::restore(const State& state) {
  if (state.first_moment.size() != first_moment_.size() ||
      state.second_moment.size() != second_moment_.size()) {
    throw ShapeMismatch("optimiser state does not match the parameter count");
  }
  steps_ = state.steps;
  beta1_power_ = state.beta1_power;
  beta2_power_ = state.beta2_power;
  first_moment_ = state.first_moment;
  second_moment_ = state.second_moment;
}

}  // namespace hab::sac
