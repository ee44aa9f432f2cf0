#pragma once

#include <array>
#include <random>
#include <span>
#include <vector>

#include "hab/sac/adam.hpp"
#include "hab/sac/mlp.hpp"
#include "hab/sac/policy.hpp"
#include "hab/sac/replay_buffer.hpp"

namespace hab::sac {

struct SacConfig {
  double gamma = 0.99;
  double learning_rate = 3e-4;
  double polyak = 0.995;
  std::size_t batch_size = 256;
  std::size_t buffer_capacity = 1000000;
  double target_entropy = 0.0;
  double initial_alpha = 0.2;
  std::size_t updates_per_stride = 1;
  std::size_t warmup_strides = 2000;
  std::vector<std::size_t> hidden = {256, 256};

  void validate() const;
};

/// Loss value with the gradient of the loss w.r.t. the optimised parameters.
struct LossGradient {
  double loss = 0.0;
  Vector gradient;
};

struct UpdateStats {
  double critic_loss = 0.0;  // mean of the two critic losses
  double actor_loss = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
  double mean_log_prob = 0.0;
};

/// Soft actor-critic with twin critics, twin target critics and a learned
/// entropy temperature.
///
/// Losses (batch means):
///   J_Q  = 1/2 (Q_i(s, a) - y)^2,  y = r + gamma (1 - d) (min_j Q'_j(s', a') - alpha log pi(a'|s'))
///   J_pi = alpha log pi(a~|s) - min_i Q_i(s, a~)
///   J_alpha = -alpha (log pi(a~|s) + H_target), optimised over log alpha.
/// All noise is passed in explicitly so updates are reproducible.
class SacAgent {
 public:
  SacAgent(std::size_t observation_size, std::size_t action_size, const SacConfig& config,
           std::uint64_t seed);

  /// Actor output for a batch of observations (obs_dim x B).
  GaussianHead actor_forward(const Matrix& observations) const;

  /// Action in (-1, 1)^act_dim; deterministic mode returns tanh(mu).
  std::vector<double> act(std::span<const double> observation, bool deterministic,
                          std::mt19937_64& rng) const;

  /// Bootstrapped critic targets using `next_noise` (act_dim x B) for a'.
  Vector critic_targets(const Batch& batch, const Matrix& next_noise) const;

  LossGradient critic_loss(const Mlp& critic, const Batch& batch, const Vector& targets) const;
  /// Actor loss and gradient w.r.t. actor parameters; `log_prob` receives log pi(a~|s).
  LossGradient actor_loss(const Batch& batch, const Matrix& noise,
                          Vector* log_prob = nullptr) const;
  /// Temperature loss; the gradient is w.r.t. log alpha (size 1).
  LossGradient alpha_loss(const Vector& log_prob) const;

  /// One full SAC update on `batch`, drawing noise from `rng`.
  /// Throws NonFiniteLoss if any loss is not finite.
  UpdateStats update(const Batch& batch, std::mt19937_64& rng);

  double alpha() const;
  double log_alpha() const { return log_alpha_; }
  void set_log_alpha(double value) { log_alpha_ = value; }

  const SacConfig& config() const { return config_; }
  std::size_t observation_size() const { return observation_size_; }
  std::size_t action_size() const { return action_size_; }

  Mlp& actor() { return actor_; }
  const Mlp& actor() const { return actor_; }
  std::array<Mlp*, 4> critics() { return {&critic1_, &critic2_, &target1_, &target2_}; }
  std::array<const Mlp*, 4> critics() const {
    return {&critic1_, &critic2_, &target1_, &target2_};
  }
  /// Actor, critic 1, critic 2, temperature.
  std::array<Adam*, 4> optimizers() {
    return {&actor_optimizer_, &critic1_optimizer_, &critic2_optimizer_, &alpha_optimizer_};
  }
  std::array<const Adam*, 4> optimizers() const {
    return {&actor_optimizer_, &critic1_optimizer_, &critic2_optimizer_, &alpha_optimizer_};
  }
  const Mlp& critic1() const { return critic1_; }
  const Mlp& critic2() const { return critic2_; }
  const Mlp& target1() const { return target1_; }
  const Mlp& target2() const { return target2_; }

 private:
  Matrix critic_input(const Matrix& observations, const Matrix& actions) const;
  Matrix gaussian_noise(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) const;

  SacConfig config_;
  std::size_t observation_size_;
  std::size_t action_size_;
  Mlp actor_;
  Mlp critic1_;
  Mlp critic2_;
  Mlp target1_;
  Mlp target2_;
  double log_alpha_;
  Adam actor_optimizer_;
  Adam critic1_optimizer_;
  Adam critic2_optimizer_;
  Adam alpha_optimizer_;
};

}  // namespace hab::sac
