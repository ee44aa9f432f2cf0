#include "hab/sac/replay_buffer.hpp"

#include <algorithm>

#include "hab/errors.hpp"

namespace hab::sac {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t observation_size,
                           std::size_t action_size)
    : capacity_(capacity), observation_size_(observation_size), action_size_(action_size) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::add(std::span<const double> observation, std::span<const double> action,
                       double reward, std::span<const double> next_observation, bool done) {
  if (observation.size() != observation_size_ || next_observation.size() != observation_size_ ||
      action.size() != action_size_) {
    throw ShapeMismatch("transition does not match the replay buffer layout");
  }
  const std::size_t width = row_width();
  if (size_ < capacity_ && next_ == size_) rows_.resize(rows_.size() + width);
  double* row = rows_.data() + next_ * width;
  row = std::copy(observation.begin(), observation.end(), row);
  row = std::copy(action.begin(), action.end(), row);
  *row++ = reward;
  row = std::copy(next_observation.begin(), next_observation.end(), row);
  *row = done ? 1.0 : 0.0;

  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count,
                                                      std::mt19937_64& rng) const {
  if (size_ == 0) throw ConfigError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> indices(count);
  for (auto& i : indices) i = pick(rng);
  return indices;
}

Batch ReplayBuffer::sample(std::size_t count, std::mt19937_64& rng) const {
  const std::vector<std::size_t> indices = sample_indices(count, rng);
  return gather(indices);
}

Batch ReplayBuffer::gather(std::span<const std::size_t> indices) const {
  const auto batch = static_cast<Eigen::Index>(indices.size());
  const auto obs = static_cast<Eigen::Index>(observation_size_);
  const auto act = static_cast<Eigen::Index>(action_size_);
  Batch out{Matrix(obs, batch), Matrix(act, batch), Vector(batch), Matrix(obs, batch),
            Vector(batch)};
  const std::size_t width = row_width();
  for (Eigen::Index b = 0; b < batch; ++b) {
    const std::size_t index = indices[static_cast<std::size_t>(b)];
    if (index >= size_) throw ShapeMismatch("replay index out of range");
    const double* row = rows_.data() + index * width;
    out.observations.col(b) = Eigen::Map<const Vector>(row, obs);
    out.actions.col(b) = Eigen::Map<const Vector>(row + obs, act);
    out.rewards[b] = row[obs + act];
    out.next_observations.col(b) = Eigen::Map<const Vector>(row + obs + act + 1, obs);
    out.done[b] = row[2 * obs + act + 1];
  }
  return out;
}

}  // namespace hab::sac
