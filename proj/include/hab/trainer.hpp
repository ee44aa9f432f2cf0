#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "hab/checkpoint.hpp"
#include "hab/config.hpp"
#include "hab/environment.hpp"
#include "hab/sac/agent.hpp"
#include "hab/sac/replay_buffer.hpp"

namespace hab {

/// Seed streams hanging off the run seed.
namespace streams {
inline constexpr std::uint64_t kAgent = 0;
inline constexpr std::uint64_t kLearner = 1;
inline constexpr std::uint64_t kTrainEpisodes = 2;
inline constexpr std::uint64_t kEvalEpisodes = 3;
}  // namespace streams

/// Reset seed of training (`stream` = kTrainEpisodes) or evaluation episode `index`.
std::uint64_t episode_seed(std::uint64_t run_seed, std::uint64_t stream, std::uint64_t index);

struct EpisodeMetrics {
  std::size_t episode = 0;
  double cumulative_reward = 0.0;
  double tw50 = 0.0;
  Termination termination = Termination::kNone;
  std::size_t strides = 0;
  double sand_used_kg = 0.0;
  double helium_used_mol = 0.0;
  double alpha = 0.0;
  double actor_loss = 0.0;   // mean over the episode's updates; NaN when none ran
  double critic_loss = 0.0;
};

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const EpisodeMetrics& metrics);

/// Single-writer SAC training loop over one environment.
class Trainer {
 public:
  Trainer(const RunConfig& config, std::uint64_t seed, std::shared_ptr<const WindGrid> grid);

  /// Continue from a checkpoint written by this trainer; the replay buffer restarts empty.
  void resume(const Checkpoint& checkpoint);

  /// One training episode; the episode index is the number already completed.
  EpisodeMetrics run_episode();

  Checkpoint checkpoint() const;

  const sac::SacAgent& agent() const { return agent_; }
  const sac::ReplayBuffer& buffer() const { return buffer_; }
  const TrainCounters& counters() const { return counters_; }
  const Environment& environment() const { return env_; }

 private:
  RunConfig config_;
  std::uint64_t seed_;
  Environment env_;
  sac::SacAgent agent_;
  sac::ReplayBuffer buffer_;
  std::mt19937_64 rng_;
  TrainCounters counters_;
};

/// Result of one evaluation episode.
struct EvalEpisode {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  EpisodeInfo info;
  std::vector<StrideRecord> trajectory;
};

struct EvalReport {
  std::vector<EvalEpisode> episodes;
  double tw50_mean = 0.0;
  double tw50_ci95 = 0.0;  // half-width, normal approximation
  double reward_mean = 0.0;
  double reward_ci95 = 0.0;
  std::map<std::string, std::size_t> terminations;
};

/// Runs the deterministic policy tanh(mu) on evaluation episodes
/// episode_seed(run_seed, kEvalEpisodes, i) for i < episodes.
/// `threads` > 1 spreads episodes over worker threads; results do not depend on it.
EvalReport evaluate(const sac::SacAgent& agent, const EnvironmentConfig& config,
                    std::shared_ptr<const WindGrid> grid, std::uint64_t run_seed,
                    std::size_t episodes, std::size_t threads = 1);

}  // namespace hab
