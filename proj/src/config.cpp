#include "hab/config.hpp"

#include <fstream>
#include <set>

#include "hab/errors.hpp"

namespace hab {

using nlohmann::json;

namespace {

// Reads optional members of one JSON object and rejects unknown keys.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + " must be a JSON object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key " + path_ + "." + key);
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  void read(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    if (!node_.contains(key) || node_.at(key).is_null()) return;
    double value = 0.0;
    read(key, value);
    out = value;
  }

  bool has(const char* key) {
    seen_.insert(key);
    return node_.contains(key);
  }
  Section child(const char* key) { return Section(node_.at(key), path_ + "." + key); }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_sac(Section s, sac::SacConfig& c) {
  s.read("gamma", c.gamma);
  s.read("learning_rate", c.learning_rate);
  s.read("polyak", c.polyak);
  s.read("batch_size", c.batch_size);
  s.read("buffer_capacity", c.buffer_capacity);
  s.read("target_entropy", c.target_entropy);
  s.read("initial_alpha", c.initial_alpha);
  s.read("updates_per_stride", c.updates_per_stride);
  s.read("warmup_strides", c.warmup_strides);
  s.read("hidden", c.hidden);
}

}  // namespace

void RunConfig::validate() const {
  environment.validate();
  sac.validate();
}

RunConfig config_from_json(const json& document) {
  RunConfig config;
  EnvironmentConfig& env = config.environment;
  Section root(document, "config");

  if (root.has("physics")) {
    Section s = root.child("physics");
    s.read("drag_coefficient", env.physics.drag_coefficient);
    s.read("molar_mass_air", env.physics.molar_mass_air);
    s.read("molar_mass_helium", env.physics.molar_mass_helium);
    s.read("gas_constant", env.physics.gas_constant);
    s.read("gravity", env.physics.gravity);
  }
  if (root.has("controller")) {
    Section s = root.child("controller");
    s.read("min_vent_mols", env.thresholds.min_vent_mols);
    s.read("min_ballast_kg", env.thresholds.min_ballast_kg);
    s.read("stride_s", env.thresholds.stride);
  }
  if (root.has("reward")) {
    Section s = root.child("reward");
    s.read("cliff", env.reward.cliff);
    s.read("radius_km", env.reward.radius_km);
    s.read("offset_km", env.reward.offset_km);
    s.read("decay_km", env.reward.decay_km);
  }
  if (root.has("episode")) {
    Section s = root.child("episode");
    s.read("duration_s", env.episode.duration);
    s.read("stride_s", env.episode.stride);
    s.read("inner_dt_s", env.episode.inner_dt);
    s.read("target_lon_deg", env.episode.target_lon);
    s.read("target_lat_deg", env.episode.target_lat);
    s.read("init_offset_deg", env.episode.init_offset_deg);
    s.read("init_altitude_min_m", env.episode.init_altitude_min);
    s.read("init_altitude_max_m", env.episode.init_altitude_max);
    s.read("start_time_min_s", env.episode.start_time_min);
    s.read("start_time_max_s", env.episode.start_time_max);
    s.read("payload_mass_kg", env.episode.payload_mass);
    s.read("sand_mass_kg", env.episode.sand_mass);
  }
  if (root.has("wind")) {
    Section s = root.child("wind");
    std::string source = "synth";
    s.read("source", source);
    if (source == "synth") {
      env.wind.kind = WindSourceConfig::Kind::kSynth;
    } else if (source == "file") {
      env.wind.kind = WindSourceConfig::Kind::kFile;
    } else {
      throw ConfigError("config.wind.source must be 'synth' or 'file'");
    }
    std::string path;
    s.read("path", path);
    env.wind.path = path;
    if (env.wind.kind == WindSourceConfig::Kind::kFile && path.empty()) {
      throw ConfigError("config.wind.path is required when source is 'file'");
    }
    s.read("seed", env.wind.seed);
    std::string regime = to_string(env.wind.synth.regime);
    s.read("regime", regime);
    env.wind.synth.regime = parse_regime(regime);
    s.read("half_width_deg", env.wind.synth.half_width_deg);
    s.read("resolution_deg", env.wind.synth.resolution_deg);
    s.read("pressure_levels", env.wind.synth.pressure_levels);
    s.read("days", env.wind.synth.days);
    if (s.has("noise")) {
      Section n = s.child("noise");
      n.read("amplitude_ms", env.wind.noise.amplitude);
      n.read("spatial_scale_deg", env.wind.noise.spatial_scale);
      n.read("pressure_scale_pa", env.wind.noise.pressure_scale);
      n.read("time_scale_s", env.wind.noise.time_scale);
    }
  }
  // Synthetic grids are centred on the target.
  env.wind.synth.center_lon = env.episode.target_lon;
  env.wind.synth.center_lat = env.episode.target_lat;

  if (root.has("normalization")) {
    Section s = root.child("normalization");
    s.read("altitude_m", env.normalization.altitude);
    s.read("speed_ms", env.normalization.speed);
    s.read("distance_m", env.normalization.distance);
    s.read("area_m2", env.normalization.area);
    s.read("volume_m3", env.normalization.volume);
  }
  if (root.has("sac")) read_sac(root.child("sac"), config.sac);
  if (root.has("train")) {
    Section s = root.child("train");
    s.read("episodes", config.train.episodes);
    s.read("checkpoint_every", config.train.checkpoint_every);
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json document;
  try {
    document = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(document);
}

json to_json(const sac::SacConfig& c) {
  return json{{"gamma", c.gamma},
              {"learning_rate", c.learning_rate},
              {"polyak", c.polyak},
              {"batch_size", c.batch_size},
              {"buffer_capacity", c.buffer_capacity},
              {"target_entropy", c.target_entropy},
              {"initial_alpha", c.initial_alpha},
              {"updates_per_stride", c.updates_per_stride},
              {"warmup_strides", c.warmup_strides},
              {"hidden", c.hidden}};
}

sac::SacConfig sac_config_from_json(const json& document) {
  sac::SacConfig config;
  read_sac(Section(document, "sac"), config);
  config.validate();
  return config;
}

json to_json(const RunConfig& config) {
  const EnvironmentConfig& env = config.environment;
  json wind{{"source", env.wind.kind == WindSourceConfig::Kind::kFile ? "file" : "synth"},
            {"path", env.wind.path.string()},
            {"seed", env.wind.seed},
            {"regime", to_string(env.wind.synth.regime)},
            {"half_width_deg", env.wind.synth.half_width_deg},
            {"resolution_deg", env.wind.synth.resolution_deg},
            {"pressure_levels", env.wind.synth.pressure_levels},
            {"days", env.wind.synth.days},
            {"noise",
             {{"amplitude_ms", env.wind.noise.amplitude},
              {"spatial_scale_deg", env.wind.noise.spatial_scale},
              {"pressure_scale_pa", env.wind.noise.pressure_scale},
              {"time_scale_s", env.wind.noise.time_scale}}}};
  json episode{{"duration_s", env.episode.duration},
               {"stride_s", env.episode.stride},
               {"inner_dt_s", env.episode.inner_dt},
               {"target_lon_deg", env.episode.target_lon},
               {"target_lat_deg", env.episode.target_lat},
               {"init_offset_deg", env.episode.init_offset_deg},
               {"init_altitude_min_m", env.episode.init_altitude_min},
               {"init_altitude_max_m", env.episode.init_altitude_max},
               {"start_time_min_s", env.episode.start_time_min},
               {"start_time_max_s", env.episode.start_time_max ? json(*env.episode.start_time_max)
                                                                : json(nullptr)},
               {"payload_mass_kg", env.episode.payload_mass},
               {"sand_mass_kg", env.episode.sand_mass}};
  return json{
      {"physics",
       {{"drag_coefficient", env.physics.drag_coefficient},
        {"molar_mass_air", env.physics.molar_mass_air},
        {"molar_mass_helium", env.physics.molar_mass_helium},
        {"gas_constant", env.physics.gas_constant},
        {"gravity", env.physics.gravity}}},
      {"controller",
       {{"min_vent_mols", env.thresholds.min_vent_mols},
        {"min_ballast_kg", env.thresholds.min_ballast_kg},
        {"stride_s", env.thresholds.stride}}},
      {"reward",
       {{"cliff", env.reward.cliff},
        {"radius_km", env.reward.radius_km},
        {"offset_km", env.reward.offset_km},
        {"decay_km", env.reward.decay_km}}},
      {"episode", episode},
      {"wind", wind},
      {"normalization",
       {{"altitude_m", env.normalization.altitude},
        {"speed_ms", env.normalization.speed},
        {"distance_m", env.normalization.distance},
        {"area_m2", env.normalization.area},
        {"volume_m3", env.normalization.volume}}},
      {"sac", to_json(config.sac)},
      {"train",
       {{"episodes", config.train.episodes}, {"checkpoint_every", config.train.checkpoint_every}}},
  };
}

}  // namespace hab
