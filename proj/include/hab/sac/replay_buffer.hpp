#pragma once

#include <random>
#include <span>
#include <vector>

#include "hab/sac/mlp.hpp"

namespace hab::sac {

/// Column-major minibatch; `done` is 1 only for genuine termination.
struct Batch {
  Matrix observations;       // obs_dim x B
  Matrix actions;            // act_dim x B, pre-scaling in (-1, 1)
  Vector rewards;            // B
  Matrix next_observations;  // obs_dim x B
  Vector done;               // B

  Eigen::Index size() const { return rewards.size(); }
};

/// Fixed-capacity FIFO of transitions with uniform sampling.
/// Storage grows with use up to `capacity`, then the oldest entries are overwritten.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t observation_size, std::size_t action_size);

  void add(std::span<const double> observation, std::span<const double> action, double reward,
           std::span<const double> next_observation, bool done);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  std::vector<std::size_t> sample_indices(std::size_t count, std::mt19937_64& rng) const;
  Batch sample(std::size_t count, std::mt19937_64& rng) const;
  Batch gather(std::span<const std::size_t> indices) const;

 private:
  std::size_t row_width() const { return 2 * observation_size_ + action_size_ + 2; }

  std::size_t capacity_;
  std::size_t observation_size_;
  std::size_t action_size_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;
  std::vector<double> rows_;
};

}  // namespace hab::sac
