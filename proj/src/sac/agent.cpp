#include "hab/sac/agent.hpp"

#include <cmath>
#include <string>

#include "hab/errors.hpp"
#include "hab/seeding.hpp"

namespace hab::sac {

namespace {

std::vector<std::size_t> layer_sizes(std::size_t input, const std::vector<std::size_t>& hidden,
                                     std::size_t output) {
  std::vector<std::size_t> sizes{input};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  return sizes;
}

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw NonFiniteLoss(std::string(what) + " became non-finite (" + std::to_string(value) + ")");
  }
}

}  // namespace

void SacConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(polyak > 0.0 && polyak < 1.0)) throw ConfigError("polyak must lie in (0, 1)");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size == 0 || buffer_capacity < batch_size) {
    throw ConfigError("batch size must be positive and not exceed the buffer capacity");
  }
  if (!(initial_alpha > 0.0)) throw ConfigError("initial alpha must be positive");
  if (hidden.empty()) throw ConfigError("networks need at least one hidden layer");
}

SacAgent::SacAgent(std::size_t observation_size, std::size_t action_size,
                   const SacConfig& config, std::uint64_t seed)
    : config_(config),
      observation_size_(observation_size),
      action_size_(action_size),
      actor_(layer_sizes(observation_size, config.hidden, 2 * action_size), derive_seed(seed, 0)),
      critic1_(layer_sizes(observation_size + action_size, config.hidden, 1), derive_seed(seed, 1)),
      critic2_(layer_sizes(observation_size + action_size, config.hidden, 1), derive_seed(seed, 2)),
      target1_(critic1_),
      target2_(critic2_),
      log_alpha_(std::log(config.initial_alpha)),
      actor_optimizer_(actor_.params().size(), config.learning_rate),
      critic1_optimizer_(critic1_.params().size(), config.learning_rate),
      critic2_optimizer_(critic2_.params().size(), config.learning_rate),
      alpha_optimizer_(1, config.learning_rate) {
  config_.validate();
}

double SacAgent::alpha() const { return std::exp(log_alpha_); }

Matrix SacAgent::critic_input(const Matrix& observations, const Matrix& actions) const {
  Matrix input(observations.rows() + actions.rows(), observations.cols());
  input << observations, actions;
  return input;
}

Matrix SacAgent::gaussian_noise(Eigen::Index rows, Eigen::Index cols,
                                std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix noise(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) noise(r, c) = normal(rng);
  return noise;
}

GaussianHead SacAgent::actor_forward(const Matrix& observations) const {
  return split_head(actor_.forward(observations));
}

std::vector<double> SacAgent::act(std::span<const double> observation, bool deterministic,
                                  std::mt19937_64& rng) const {
  const Matrix input =
      Eigen::Map<const Matrix>(observation.data(), static_cast<Eigen::Index>(observation.size()), 1);
  const GaussianHead head = actor_forward(input);
  Matrix action;
  if (deterministic) {
    action = head.mean.array().tanh();
  } else {
    action = squash(head.mean, head.log_sigma, gaussian_noise(head.mean.rows(), 1, rng)).action;
  }
  return {action.data(), action.data() + action.size()};
}

Vector SacAgent::critic_targets(const Batch& batch, const Matrix& next_noise) const {
  const GaussianHead head = actor_forward(batch.next_observations);
  const SquashedSample next = squash(head.mean, head.log_sigma, next_noise);
  const Matrix input = critic_input(batch.next_observations, next.action);
  const Matrix q1 = target1_.forward(input);
  const Matrix q2 = target2_.forward(input);
  const Vector soft_value =
      q1.row(0).cwiseMin(q2.row(0)).transpose() - alpha() * next.log_prob;
  return batch.rewards.array() +
         config_.gamma * (1.0 - batch.done.array()) * soft_value.array();
}

LossGradient SacAgent::critic_loss(const Mlp& critic, const Batch& batch,
                                   const Vector& targets) const {
  Mlp::Cache cache;
  const Matrix q = critic.forward(critic_input(batch.observations, batch.actions), &cache);
  const Matrix diff = q - targets.transpose();
  const double count = static_cast<double>(batch.size());
  LossGradient out;
  out.loss = 0.5 * diff.squaredNorm() / count;
  critic.backward(cache, diff / count, &out.gradient);
  return out;
}

LossGradient SacAgent::actor_loss(const Batch& batch, const Matrix& noise,
                                  Vector* log_prob) const {
  Mlp::Cache actor_cache;
  const Matrix raw = actor_.forward(batch.observations, &actor_cache);
  const GaussianHead head = split_head(raw);
  const SquashedSample sample = squash(head.mean, head.log_sigma, noise);

  const Matrix input = critic_input(batch.observations, sample.action);
  Mlp::Cache cache1, cache2;
  const Matrix q1 = critic1_.forward(input, &cache1);
  const Matrix q2 = critic2_.forward(input, &cache2);

  const Eigen::Index count = batch.size();
  const double inv_count = 1.0 / static_cast<double>(count);
  const double temperature = alpha();
  Matrix select1 = Matrix::Zero(1, count);
  Matrix select2 = Matrix::Zero(1, count);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < count; ++b) {
    const bool first = q1(0, b) <= q2(0, b);
    (first ? select1 : select2)(0, b) = 1.0;
    loss += temperature * sample.log_prob[b] - (first ? q1(0, b) : q2(0, b));
  }

  // dQ_min/da through whichever critic is smaller for each sample.
  Matrix grad_input1, grad_input2;
  critic1_.backward(cache1, select1, nullptr, &grad_input1);
  critic2_.backward(cache2, select2, nullptr, &grad_input2);
  const auto dims = static_cast<Eigen::Index>(action_size_);
  const Matrix dq_da = grad_input1.bottomRows(dims) + grad_input2.bottomRows(dims);

  const Matrix squash_slope = 1.0 - sample.action.array().square();
  const Matrix sigma_eps = head.log_sigma.array().exp() * noise.array();
  const Matrix dq_du = dq_da.cwiseProduct(squash_slope);
  const Matrix dlogp_dmean = 2.0 * sample.action;
  const Matrix dlogp_dlogsigma = (-1.0 + 2.0 * sample.action.array() * sigma_eps.array()).matrix();

  Matrix grad_raw(raw.rows(), raw.cols());
  grad_raw.topRows(dims) = inv_count * (temperature * dlogp_dmean - dq_du);
  grad_raw.bottomRows(dims) =
      (inv_count * (temperature * dlogp_dlogsigma - dq_du.cwiseProduct(sigma_eps)))
          .cwiseProduct((1.0 - head.clamp_active.array()).matrix());

  LossGradient out;
  out.loss = loss * inv_count;
  actor_.backward(actor_cache, grad_raw, &out.gradient);
  if (log_prob) *log_prob = sample.log_prob;
  return out;
}

LossGradient SacAgent::alpha_loss(const Vector& log_prob) const {
  const double temperature = alpha();
  const double mean_term = (log_prob.array() + config_.target_entropy).mean();
  LossGradient out;
  out.loss = -temperature * mean_term;
  out.gradient = Vector::Constant(1, -temperature * mean_term);
  return out;
}

UpdateStats SacAgent::update(const Batch& batch, std::mt19937_64& rng) {
  const auto dims = static_cast<Eigen::Index>(action_size_);
  const Vector targets = critic_targets(batch, gaussian_noise(dims, batch.size(), rng));

  const LossGradient q1 = critic_loss(critic1_, batch, targets);
  const LossGradient q2 = critic_loss(critic2_, batch, targets);
  require_finite(q1.loss, "critic 1 loss");
  require_finite(q2.loss, "critic 2 loss");
  critic1_optimizer_.step(critic1_.params(), q1.gradient);
  critic2_optimizer_.step(critic2_.params(), q2.gradient);

  Vector log_prob;
  const LossGradient pi = actor_loss(batch, gaussian_noise(dims, batch.size(), rng), &log_prob);
  require_finite(pi.loss, "actor loss");
  actor_optimizer_.step(actor_.params(), pi.gradient);

  const LossGradient temperature = alpha_loss(log_prob);
  require_finite(temperature.loss, "temperature loss");
  Vector log_alpha = Vector::Constant(1, log_alpha_);
  alpha_optimizer_.step(log_alpha, temperature.gradient);
  log_alpha_ = log_alpha[0];

  polyak_update(target1_, critic1_, config_.polyak);
  polyak_update(target2_, critic2_, config_.polyak);

  return {0.5 * (q1.loss + q2.loss), pi.loss, temperature.loss, alpha(), log_prob.mean()};
}

}  // namespace hab::sac
