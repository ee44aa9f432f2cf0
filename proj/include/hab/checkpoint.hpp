#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hab/sac/agent.hpp"

namespace hab {

/// Training progress stored alongside the networks.
struct TrainCounters {
  std::uint64_t episodes = 0;      // completed episodes
  std::uint64_t total_strides = 0;
  std::uint64_t updates = 0;
};

struct NetworkBlob {
  std::vector<std::size_t> sizes;
  sac::Vector params;
};

/// Full learner state. Layout in docs/formats.md.
struct Checkpoint {
  nlohmann::json config;  // echo of the run config
  TrainCounters counters;
  std::string rng_state;  // textual std::mt19937_64 state of the learner stream
  double log_alpha = 0.0;
  std::vector<NetworkBlob> networks;         // actor, critic 1, critic 2, target 1, target 2
  std::vector<sac::Adam::State> optimizers;  // actor, critic 1, critic 2, temperature
};

Checkpoint capture(const sac::SacAgent& agent);
/// Copies parameters into `agent`; any layer-shape difference raises ShapeError.
void restore(const Checkpoint& checkpoint, sac::SacAgent& agent);

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace hab
