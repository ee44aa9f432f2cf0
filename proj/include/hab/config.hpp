#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hab/environment.hpp"
#include "hab/sac/agent.hpp"

namespace hab {

struct TrainSettings {
  std::size_t episodes = 300;
  std::size_t checkpoint_every = 50;  // 0 disables periodic checkpoints
};

/// Everything a run needs. Every field has a default; a config file only
/// lists the values it changes. Schema in docs/formats.md.
struct RunConfig {
  EnvironmentConfig environment;
  sac::SacConfig sac;
  TrainSettings train;

  void validate() const;
};

/// Parse a JSON config; unknown keys and bad values raise ConfigError.
RunConfig config_from_json(const nlohmann::json& document);
RunConfig load_config(const std::filesystem::path& path);

/// Complete JSON form (all defaults filled in).
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const sac::SacConfig& config);
sac::SacConfig sac_config_from_json(const nlohmann::json& document);

}  // namespace hab
