#include "hab/environment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "hab/errors.hpp"
#include "hab/resource_solver.hpp"
#include "hab/seeding.hpp"

namespace hab {

namespace {

constexpr double kMetersPerDegree = 111320.0;

double wrap_angle(double angle) {
  using std::numbers::pi;
  angle = std::remainder(angle, 2.0 * pi);
  return angle <= -pi ? angle + 2.0 * pi : angle;
}

double uniform(std::uint64_t& state, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53);
}

template <std::size_t N>
void push_history(std::array<double, N>& history, double value) {
  for (std::size_t i = N - 1; i > 0; --i) history[i] = history[i - 1];
  history[0] = value;
}

}  // namespace

void RewardParams::validate() const {
  if (!(cliff > 0.0 && cliff <= 1.0)) throw ConfigError("reward cliff must lie in (0, 1]");
  if (!(radius_km > 0.0) || !(decay_km > 0.0)) {
    throw ConfigError("reward radius and decay length must be positive");
  }
}

double reward(double distance_km, const RewardParams& params) {
  if (distance_km < params.radius_km) return 1.0;
  return params.cliff * std::exp2(-(distance_km - params.offset_km) / params.decay_km);
}

double bearing_error(const WindSample& wind, double balloon_x, double balloon_y, double target_x,
                     double target_y) {
  const double dx = target_x - balloon_x;
  const double dy = target_y - balloon_y;
  const double to_target = (dx == 0.0 && dy == 0.0) ? 0.0 : std::atan2(dy, dx);
  return wrap_angle(std::atan2(wind.v_wy, wind.v_wx) - to_target);
}

void EpisodeConfig::validate() const {
  if (!(stride > 0.0) || !(duration > 0.0) || !(inner_dt > 0.0)) {
    throw ConfigError("episode duration, stride and inner step must be positive");
  }
  const double strides = duration / stride;
  if (std::abs(strides - std::round(strides)) > 1e-9) {
    throw ConfigError("episode duration must be a multiple of the stride");
  }
  const double inner = stride / inner_dt;
  if (std::abs(inner - std::round(inner)) > 1e-9) {
    throw ConfigError("stride must be a multiple of the inner physics step");
  }
  if (!(init_offset_deg >= 0.0)) throw ConfigError("initial offset range must be non-negative");
  if (!(init_altitude_min >= kMinAltitude && init_altitude_max <= kMaxAltitude &&
        init_altitude_min <= init_altitude_max)) {
    throw ConfigError("initial altitude range must lie inside [14000, 21000] m");
  }
  if (!(payload_mass > 0.0) || !(sand_mass >= 0.0)) {
    throw ConfigError("payload mass must be positive and sand mass non-negative");
  }
  if (start_time_max && *start_time_max < start_time_min) {
    throw ConfigError("start time range is empty");
  }
}

std::size_t EpisodeConfig::strides() const {
  return static_cast<std::size_t>(std::llround(duration / stride));
}

void EnvironmentConfig::validate() const {
  physics.validate();
  thresholds.validate();
  reward.validate();
  episode.validate();
  wind.noise.validate();
  if (std::abs(thresholds.stride - episode.stride) > 1e-9) {
    throw ConfigError("controller stride and episode stride differ");
  }
}

std::shared_ptr<const WindGrid> make_wind_grid(const WindSourceConfig& config) {
  if (config.kind == WindSourceConfig::Kind::kFile) {
    return std::make_shared<const WindGrid>(WindGrid::load(config.path));
  }
  return std::make_shared<const WindGrid>(synth(config.seed, config.synth));
}

std::string to_string(Termination termination) {
  switch (termination) {
    case Termination::kNone:
      return "none";
    case Termination::kTime:
      return "time";
    case Termination::kResources:
      return "resources";
  }
  return "unknown";
}

double tw50(std::span<const StrideRecord> trajectory, std::size_t scheduled_strides,
            double radius_km) {
  const std::size_t total = std::max(scheduled_strides, trajectory.size());
  if (total == 0) throw ConfigError("tw50 of an empty trajectory");
  std::size_t inside = 0;
  for (const StrideRecord& row : trajectory) inside += row.distance_km < radius_km;
  return static_cast<double>(inside) / static_cast<double>(total);
}

void write_trajectory_csv(std::span<const StrideRecord> trajectory,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write trajectory " + path.string());
  out << "t_s,x_m,y_m,h_m,h_dot_ms,a0_m,a1,a2,action,vented_mol,dropped_kg,reward,dist_km\n";
  char line[512];
  for (const StrideRecord& r : trajectory) {
    std::snprintf(line, sizeof line,
                  "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%s,%.10g,%.10g,%.10g,%.10g\n",
                  r.t, r.x, r.y, r.h, r.h_dot, r.command.altitude, r.command.time_factor,
                  r.command.float_flag, r.action.c_str(), r.vented_mols, r.dropped_kg, r.reward,
                  r.distance_km);
    out << line;
  }
  if (!out) throw FormatError("failed writing trajectory " + path.string());
}

double EpisodeInfo::tw50() const {
  const std::size_t total = std::max(scheduled_strides, strides);
  return total == 0 ? 0.0 : static_cast<double>(inside_strides) / static_cast<double>(total);
}

Environment::Environment(EnvironmentConfig config)
    : Environment(config, make_wind_grid(config.wind)) {}

Environment::Environment(EnvironmentConfig config, std::shared_ptr<const WindGrid> grid)
    : config_(std::move(config)),
      atmosphere_(Atmosphere::standard(config_.physics)),
      grid_(std::move(grid)) {
  config_.validate();
  if (!grid_) throw ConfigError("environment needs a wind grid");

  const EpisodeConfig& ep = config_.episode;
  const auto lon = grid_->lon();
  const auto lat = grid_->lat();
  const auto time = grid_->time();
  if (ep.target_lon - ep.init_offset_deg < lon.front() ||
      ep.target_lon + ep.init_offset_deg > lon.back() ||
      ep.target_lat - ep.init_offset_deg < lat.front() ||
      ep.target_lat + ep.init_offset_deg > lat.back()) {
    throw ConfigError("initial position range exceeds the wind grid's lon/lat bounds");
  }
  const double last_start = ep.start_time_max.value_or(time.back() - ep.duration);
  if (ep.start_time_min < time.front() || last_start + ep.duration > time.back() + 1e-9 ||
      last_start < ep.start_time_min) {
    throw ConfigError("episode start-time range plus duration exceeds the wind grid's time axis");
  }
}

double Environment::longitude(double x) const {
  const double lat_rad = config_.episode.target_lat * std::numbers::pi / 180.0;
  return config_.episode.target_lon + x / (kMetersPerDegree * std::cos(lat_rad));
}

double Environment::latitude(double y) const {
  return config_.episode.target_lat + y / kMetersPerDegree;
}

Observation Environment::reset(std::uint64_t seed) {
  const EpisodeConfig& ep = config_.episode;
  std::uint64_t rng = derive_seed(seed, 0);

  const double lon_offset = uniform(rng, -ep.init_offset_deg, ep.init_offset_deg);
  const double lat_offset = uniform(rng, -ep.init_offset_deg, ep.init_offset_deg);
  const double altitude = uniform(rng, ep.init_altitude_min, ep.init_altitude_max);
  const double last_start = ep.start_time_max.value_or(grid_->time().back() - ep.duration);
  start_time_ = uniform(rng, ep.start_time_min, last_start);

  NoiseConfig noise = config_.wind.noise;
  noise.seed = splitmix64(rng);
  noise_.emplace(noise);

  const double lat_rad = ep.target_lat * std::numbers::pi / 180.0;
  state_ = BalloonState{};
  state_.x = lon_offset * kMetersPerDegree * std::cos(lat_rad);
  state_.y = lat_offset * kMetersPerDegree;
  state_.h = altitude;
  state_.m_p = ep.payload_mass;
  state_.m_s = ep.sand_mass;
  // Neutral buoyancy: n (rho R T / P - M_h) = m_p + m_s.
  const AtmosphereSample atm = atmosphere_.sample(altitude);
  state_.n = (state_.m_p + state_.m_s) /
             (atm.density * config_.physics.gas_constant * atm.temperature / atm.pressure -
              config_.physics.molar_mass_helium);

  altitude_history_.fill(state_.h);
  rate_history_.fill(state_.h_dot);
  float_history_.fill(-1.0);
  info_ = EpisodeInfo{};
  info_.scheduled_strides = ep.strides();
  info_.initial_mols = state_.n;
  info_.initial_sand = state_.m_s;
  trajectory_.clear();
  trajectory_.reserve(info_.scheduled_strides);
  done_ = false;
  return observe();
}

WindSample Environment::true_wind(const BalloonState& state, double pressure) {
  const double lon = longitude(state.x);
  const double lat = latitude(state.y);
  const double time = start_time_ + state.t;
  bool clamped = false;
  const WindSample forecast = grid_->sample(lon, lat, pressure, time, &clamped);
  info_.clamped_wind_queries += clamped;
  return noise_->augment(forecast, lon, lat, pressure, time);
}

Observation Environment::observe() {
  Observation o{};
  const double lon = longitude(state_.x);
  const double lat = latitude(state_.y);
  const double time = start_time_ + state_.t;
  for (std::size_t k = 0; k < kWindLevels; ++k) {
    const double pressure = kObservationMinPressure + (kObservationMaxPressure - kObservationMinPressure) *
                                                          static_cast<double>(k) /
                                                          static_cast<double>(kWindLevels - 1);
    const WindSample forecast = grid_->sample(lon, lat, pressure, time);
    o[obs::kSpeed + k] = std::hypot(forecast.v_wx, forecast.v_wy);
    o[obs::kBearing + k] = bearing_error(forecast, state_.x, state_.y);
  }

  const AtmosphereSample atm = atmosphere_.sample(state_.h);
  const WindSample local = true_wind(state_, atm.pressure);
  const double volume =
      envelope_volume(state_.n, atm.temperature, atm.pressure, config_.physics.gas_constant);
  const double distance = std::hypot(state_.x, state_.y);

  o[obs::kAltitude] = state_.h;
  o[obs::kAscentRate] = state_.h_dot;
  o[obs::kLocalSpeed] = std::hypot(local.v_wx, local.v_wy);
  o[obs::kLocalBearing] = bearing_error(local, state_.x, state_.y);
  o[obs::kDragArea] = drag_area(volume);
  o[obs::kVolume] = volume;
  o[obs::kTotalMass] = total_mass(state_, config_.physics);
  o[obs::kDistance] = distance;
  if (distance == 0.0) {
    o[obs::kHeadingSin] = 0.0;
    o[obs::kHeadingCos] = 1.0;
  } else {
    o[obs::kHeadingSin] = -state_.y / distance;
    o[obs::kHeadingCos] = -state_.x / distance;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    o[obs::kAltitudeHistory + i] = altitude_history_[i];
    o[obs::kAscentRateHistory + i] = rate_history_[i];
    o[obs::kFloatHistory + i] = float_history_[i];
  }
  o[obs::kSand] = state_.m_s;
  o[obs::kHelium] = state_.n;
  return o;
}

std::array<double, kObservationSize> Environment::normalize(const Observation& o) const {
  const Normalization& scale = config_.normalization;
  std::array<double, kObservationSize> f{};
  for (std::size_t k = 0; k < kWindLevels; ++k) {
    f[obs::kSpeed + k] = o[obs::kSpeed + k] / scale.speed;
    f[obs::kBearing + k] = o[obs::kBearing + k] / std::numbers::pi;
  }
  const double initial_mass = config_.episode.payload_mass + info_.initial_sand +
                              info_.initial_mols * config_.physics.molar_mass_helium;
  f[obs::kAltitude] = o[obs::kAltitude] / scale.altitude;
  f[obs::kAscentRate] = o[obs::kAscentRate] / scale.speed;
  f[obs::kLocalSpeed] = o[obs::kLocalSpeed] / scale.speed;
  f[obs::kLocalBearing] = o[obs::kLocalBearing] / std::numbers::pi;
  f[obs::kDragArea] = o[obs::kDragArea] / scale.area;
  f[obs::kVolume] = o[obs::kVolume] / scale.volume;
  f[obs::kTotalMass] = o[obs::kTotalMass] / initial_mass;
  f[obs::kDistance] = o[obs::kDistance] / scale.distance;
  f[obs::kHeadingSin] = o[obs::kHeadingSin];
  f[obs::kHeadingCos] = o[obs::kHeadingCos];
  for (std::size_t i = 0; i < 3; ++i) {
    f[obs::kAltitudeHistory + i] = o[obs::kAltitudeHistory + i] / scale.altitude;
    f[obs::kAscentRateHistory + i] = o[obs::kAscentRateHistory + i] / scale.speed;
    f[obs::kFloatHistory + i] = o[obs::kFloatHistory + i];
  }
  f[obs::kSand] = info_.initial_sand > 0.0 ? o[obs::kSand] / info_.initial_sand : 0.0;
  f[obs::kHelium] = o[obs::kHelium] / info_.initial_mols;
  return f;
}

StepResult Environment::step(const CommandTriple& command) {
  if (done_) throw StepAfterDone();
  command.validate();
  const Decision decision = decide(command, state_, atmosphere_.sample(state_.h),
                                   config_.thresholds, config_.physics);
  return advance_stride(decision, command, command.float_flag);
}

StepResult Environment::step_action(const ControlAction& act) {
  if (done_) throw StepAfterDone();
  Decision decision;
  decision.action = act;
  // Scripted amounts are clamped to what is on board; asking for more sand than
  // remains exhausts the ballast.
  if (dropped_sand(act) > state_.m_s) {
    decision.shortfall = Shortfall::kSand;
    decision.note = "scripted ballast exceeds remaining sand";
    if (auto* b = std::get_if<action::Ballast>(&decision.action)) b->kg = state_.m_s;
    if (auto* f = std::get_if<action::Float>(&decision.action)) f->ballast_kg = state_.m_s;
  }
  if (vented_mols(act) > state_.n - config_.thresholds.min_vent_mols) {
    decision.shortfall = Shortfall::kHelium;
    decision.note = "scripted vent exceeds remaining helium";
    decision.action = action::DoNothing{};
  }
  CommandTriple record{std::nan(""), std::nan(""),
                       std::holds_alternative<action::Float>(act) ? 1.0 : -1.0};
  return advance_stride(decision, record, record.float_flag);
}

StepResult Environment::advance_stride(const Decision& decision, const CommandTriple& command,
                                       double float_flag) {
  const EpisodeConfig& ep = config_.episode;
  push_history(altitude_history_, state_.h);
  push_history(rate_history_, state_.h_dot);
  push_history(float_history_, float_flag > 0.0 ? 1.0 : -1.0);

  const double vented = vented_mols(decision.action);
  const double dropped = dropped_sand(decision.action);
  state_ = apply(decision.action, state_);
  info_.vented_mols += vented;
  info_.dropped_kg += dropped;
  if (!decision.note.empty()) info_.last_note = decision.note;

  const auto inner_steps = static_cast<std::size_t>(std::llround(ep.stride / ep.inner_dt));
  for (std::size_t i = 0; i < inner_steps; ++i) {
    const WindSample wind = true_wind(state_, atmosphere_.sample(state_.h).pressure);
    state_ = advance(state_, wind, ep.inner_dt, atmosphere_, config_.physics);
  }
  ++info_.strides;
  state_.t = static_cast<double>(info_.strides) * ep.stride;

  const double distance_km = std::hypot(state_.x, state_.y) / 1000.0;
  const double r = reward(distance_km, config_.reward);
  info_.cumulative_reward += r;
  info_.inside_strides += distance_km < config_.reward.radius_km;

  StepResult result;
  result.reward = r;
  result.terminated = decision.shortfall != Shortfall::kNone;
  result.truncated = !result.terminated && info_.strides >= info_.scheduled_strides;
  if (result.terminated) info_.termination = Termination::kResources;
  if (result.truncated) info_.termination = Termination::kTime;
  done_ = result.terminated || result.truncated;

  trajectory_.push_back({state_.t, state_.x, state_.y, state_.h, state_.h_dot, command,
                         describe(decision.action), vented, dropped, r, distance_km});
  result.observation = observe();
  result.info = info_;
  return result;
}

}  // namespace hab
