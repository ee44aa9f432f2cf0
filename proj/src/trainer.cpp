#include "hab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "hab/errors.hpp"
#include "hab/seeding.hpp"

namespace hab {

namespace {

std::array<double, 3> to_array(std::span<const double> action) {
  return {action[0], action[1], action[2]};
}

double mean_or_nan(double sum, std::size_t count) {
  return count == 0 ? std::nan("") : sum / static_cast<double>(count);
}

}  // namespace

std::uint64_t episode_seed(std::uint64_t run_seed, std::uint64_t stream, std::uint64_t index) {
  return derive_seed(derive_seed(run_seed, stream), index);
}

void write_metrics_header(std::ostream& out) {
  out << "episode,cumulative_reward,tw50,termination_reason,strides,sand_used_kg,"
         "helium_used_mol,alpha,actor_loss,critic_loss\n";
}

void write_metrics_row(std::ostream& out, const EpisodeMetrics& m) {
  char line[512];
  std::snprintf(line, sizeof line, "%zu,%.10g,%.10g,%s,%zu,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                m.episode, m.cumulative_reward, m.tw50, to_string(m.termination).c_str(),
                m.strides, m.sand_used_kg, m.helium_used_mol, m.alpha, m.actor_loss,
                m.critic_loss);
  out << line;
}

Trainer::Trainer(const RunConfig& config, std::uint64_t seed,
                 std::shared_ptr<const WindGrid> grid)
    : config_(config),
      seed_(seed),
      env_(config.environment, std::move(grid)),
      agent_(kObservationSize, kActionSize, config.sac, derive_seed(seed, streams::kAgent)),
      buffer_(config.sac.buffer_capacity, kObservationSize, kActionSize),
      rng_(derive_seed(seed, streams::kLearner)) {}

void Trainer::resume(const Checkpoint& checkpoint) {
  restore(checkpoint, agent_);
  counters_ = checkpoint.counters;
  if (!checkpoint.rng_state.empty()) {
    std::istringstream in(checkpoint.rng_state);
    in >> rng_;
    if (!in) throw FormatError("checkpoint learner RNG state is malformed");
  }
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint out = capture(agent_);
  out.config = to_json(config_);
  out.counters = counters_;
  std::ostringstream rng;
  rng << rng_;
  out.rng_state = rng.str();
  return out;
}

EpisodeMetrics Trainer::run_episode() {
  const sac::SacConfig& sac = config_.sac;
  EpisodeMetrics metrics;
  metrics.episode = counters_.episodes;

  Observation raw = env_.reset(episode_seed(seed_, streams::kTrainEpisodes, counters_.episodes));
  auto observation = env_.normalize(raw);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  std::size_t updates = 0;

  bool done = false;
  while (!done) {
    std::vector<double> action;
    if (counters_.total_strides < sac.warmup_strides) {
      action = {uniform(rng_), uniform(rng_), uniform(rng_)};
    } else {
      action = agent_.act(observation, false, rng_);
    }
    const StepResult step = env_.step(CommandTriple::from_unit(to_array(action)));
    const auto next = env_.normalize(step.observation);
    // Time-outs keep bootstrapping; only resource exhaustion is absorbing.
    buffer_.add(observation, action, step.reward, next, step.terminated);
    observation = next;
    ++counters_.total_strides;
    done = step.terminated || step.truncated;

    if (counters_.total_strides >= sac.warmup_strides && buffer_.size() >= sac.batch_size) {
      for (std::size_t u = 0; u < sac.updates_per_stride; ++u) {
        const sac::UpdateStats stats = agent_.update(buffer_.sample(sac.batch_size, rng_), rng_);
        actor_loss += stats.actor_loss;
        critic_loss += stats.critic_loss;
        ++updates;
        ++counters_.updates;
      }
    }
  }

  const EpisodeInfo& info = env_.info();
  metrics.cumulative_reward = info.cumulative_reward;
  metrics.tw50 = info.tw50();
  metrics.termination = info.termination;
  metrics.strides = info.strides;
  metrics.sand_used_kg = info.dropped_kg;
  metrics.helium_used_mol = info.vented_mols;
  metrics.alpha = agent_.alpha();
  metrics.actor_loss = mean_or_nan(actor_loss, updates);
  metrics.critic_loss = mean_or_nan(critic_loss, updates);
  ++counters_.episodes;
  return metrics;
}

EvalReport evaluate(const sac::SacAgent& agent, const EnvironmentConfig& config,
                    std::shared_ptr<const WindGrid> grid, std::uint64_t run_seed,
                    std::size_t episodes, std::size_t threads) {
  if (episodes == 0) throw ConfigError("evaluation needs at least one episode");
  EvalReport report;
  report.episodes.resize(episodes);

  auto run = [&](std::size_t index) {
    Environment env(config, grid);
    std::mt19937_64 unused(0);  // deterministic policy draws no noise
    EvalEpisode& out = report.episodes[index];
    out.index = index;
    out.seed = episode_seed(run_seed, streams::kEvalEpisodes, index);
    auto observation = env.normalize(env.reset(out.seed));
    while (!env.done()) {
      const std::vector<double> action = agent.act(observation, true, unused);
      const StepResult step = env.step(CommandTriple::from_unit(to_array(action)));
      observation = env.normalize(step.observation);
    }
    out.info = env.info();
    out.trajectory = env.trajectory();
  };

  threads = std::clamp<std::size_t>(threads, 1, episodes);
  if (threads == 1) {
    for (std::size_t i = 0; i < episodes; ++i) run(i);
  } else {
    // Static interleaved partition; each worker writes only its own slots.
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < episodes; i += threads) run(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& worker : workers) worker.join();
    for (auto& error : errors) {
      if (error) std::rethrow_exception(error);
    }
  }

  const auto n = static_cast<double>(episodes);
  double tw_sum = 0.0, tw_sq = 0.0, r_sum = 0.0, r_sq = 0.0;
  for (const EvalEpisode& e : report.episodes) {
    const double tw = e.info.tw50();
    tw_sum += tw;
    tw_sq += tw * tw;
    r_sum += e.info.cumulative_reward;
    r_sq += e.info.cumulative_reward * e.info.cumulative_reward;
    ++report.terminations[to_string(e.info.termination)];
  }
  report.tw50_mean = tw_sum / n;
  report.reward_mean = r_sum / n;
  if (episodes > 1) {
    const double tw_var = std::max(0.0, (tw_sq - n * report.tw50_mean * report.tw50_mean) / (n - 1));
    const double r_var =
        std::max(0.0, (r_sq - n * report.reward_mean * report.reward_mean) / (n - 1));
    report.tw50_ci95 = 1.96 * std::sqrt(tw_var / n);
    report.reward_ci95 = 1.96 * std::sqrt(r_var / n);
  }
  return report;
}

}  // namespace hab
