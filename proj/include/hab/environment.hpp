#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hab/atmosphere.hpp"
#include "hab/controller.hpp"
#include "hab/dynamics.hpp"
#include "hab/wind_field.hpp"

namespace hab {

/// Observation layout: 25 wind speeds, 25 bearing errors, then 21 ambient features.
inline constexpr std::size_t kWindLevels = 25;
inline constexpr std::size_t kAmbientFeatures = 21;
inline constexpr std::size_t kObservationSize = 2 * kWindLevels + kAmbientFeatures;  // 71
inline constexpr std::size_t kActionSize = 3;
inline constexpr double kObservationMinPressure = 5000.0;
inline constexpr double kObservationMaxPressure = 14000.0;

/// Offsets of the ambient features inside the observation.
namespace obs {
inline constexpr std::size_t kSpeed = 0;
inline constexpr std::size_t kBearing = kWindLevels;
inline constexpr std::size_t kAltitude = 2 * kWindLevels;
inline constexpr std::size_t kAscentRate = kAltitude + 1;
inline constexpr std::size_t kLocalSpeed = kAltitude + 2;
inline constexpr std::size_t kLocalBearing = kAltitude + 3;
inline constexpr std::size_t kDragArea = kAltitude + 4;
inline constexpr std::size_t kVolume = kAltitude + 5;
inline constexpr std::size_t kTotalMass = kAltitude + 6;
inline constexpr std::size_t kDistance = kAltitude + 7;
inline constexpr std::size_t kHeadingSin = kAltitude + 8;
inline constexpr std::size_t kHeadingCos = kAltitude + 9;
inline constexpr std::size_t kAltitudeHistory = kAltitude + 10;     // 3 entries
inline constexpr std::size_t kAscentRateHistory = kAltitude + 13;   // 3 entries
inline constexpr std::size_t kFloatHistory = kAltitude + 16;        // 3 entries
inline constexpr std::size_t kSand = kAltitude + 19;
inline constexpr std::size_t kHelium = kAltitude + 20;
}  // namespace obs

/// Raw (SI unit) observation. Angles are in (-pi, pi].
using Observation = std::array<double, kObservationSize>;

struct RewardParams {
  double cliff = 0.4;         // c
  double radius_km = 50.0;    // station-keeping radius
  double offset_km = 50.0;    // shaping offset (rho)
  double decay_km = 100.0;    // shaping length (tau)

  void validate() const;
};

/// 1 inside the radius, c * 2^(-(d - rho) / tau) outside.
double reward(double distance_km, const RewardParams& params);

/// Signed angle from the balloon->target direction to the wind vector,
/// wrapped to (-pi, pi]. Positive means the wind points counter-clockwise of
/// the target. When balloon and target coincide the target direction is
/// taken as east.
double bearing_error(const WindSample& wind, double balloon_x, double balloon_y,
                     double target_x = 0.0, double target_y = 0.0);

struct EpisodeConfig {
  double duration = 259200.0;  // [s]
  double stride = 1200.0;      // [s]
  double inner_dt = 10.0;      // [s]
  double target_lon = -113.0;  // [deg]
  double target_lat = 1.0;     // [deg]
  double init_offset_deg = 0.3;        // start lon/lat offsets drawn from [-x, x]
  double init_altitude_min = 15000.0;  // [m]
  double init_altitude_max = 20000.0;  // [m]
  double start_time_min = 0.0;         // forecast time of episode start [s]
  std::optional<double> start_time_max;  // default: grid end - duration
  double payload_mass = 1.6;  // m_p [kg]
  double sand_mass = 0.4;     // m_s at launch [kg]

  void validate() const;
  std::size_t strides() const;
};

/// Per-feature divisors for the policy input.
struct Normalization {
  double altitude = 21000.0;
  double speed = 30.0;
  double distance = 200000.0;
  double area = 10.0;
  double volume = 100.0;
};

struct WindSourceConfig {
  enum class Kind { kSynth, kFile };
  Kind kind = Kind::kSynth;
  std::uint64_t seed = 1;
  SynthParams synth;
  std::filesystem::path path;
  NoiseConfig noise;  // seed is re-derived per episode
};

struct EnvironmentConfig {
  PhysicsConstants physics;
  ControlThresholds thresholds;
  RewardParams reward;
  EpisodeConfig episode;
  WindSourceConfig wind;
  Normalization normalization;

  void validate() const;
};

/// Builds (synth) or loads (file) the configured wind grid.
std::shared_ptr<const WindGrid> make_wind_grid(const WindSourceConfig& config);

enum class Termination { kNone, kTime, kResources };
std::string to_string(Termination termination);

/// One row of the trajectory log, written after every stride.
struct StrideRecord {
  double t;  // end of stride [s]
  double x;
  double y;
  double h;
  double h_dot;
  CommandTriple command;
  std::string action;
  double vented_mols;
  double dropped_kg;
  double reward;
  double distance_km;
};

/// Fraction of `scheduled_strides` strides that ended within 50 km.
/// `scheduled_strides` defaults to the trajectory length; larger values count
/// strides lost to early termination as outside.
double tw50(std::span<const StrideRecord> trajectory, std::size_t scheduled_strides = 0,
            double radius_km = 50.0);

void write_trajectory_csv(std::span<const StrideRecord> trajectory,
                          const std::filesystem::path& path);

struct EpisodeInfo {
  std::size_t strides = 0;
  std::size_t scheduled_strides = 0;
  std::size_t inside_strides = 0;
  double cumulative_reward = 0.0;
  double vented_mols = 0.0;
  double dropped_kg = 0.0;
  double initial_mols = 0.0;
  double initial_sand = 0.0;
  std::size_t clamped_wind_queries = 0;
  Termination termination = Termination::kNone;
  std::string last_note;

  double tw50() const;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  EpisodeInfo info;
};

/// The station-keeping MDP: 20-minute strides, 3-day episodes.
///
/// Single-threaded; independent instances share only the immutable wind grid.
class Environment {
 public:
  explicit Environment(EnvironmentConfig config);
  Environment(EnvironmentConfig config, std::shared_ptr<const WindGrid> grid);

  Observation reset(std::uint64_t seed);

  /// Resolve the command through the controller and integrate one stride.
  StepResult step(const CommandTriple& command);
  /// Apply a raw action (scripted flights); float history records a2 = 1 for Float.
  StepResult step_action(const ControlAction& action);

  /// Policy input: `observation` divided by the normalisation constants.
  std::array<double, kObservationSize> normalize(const Observation& observation) const;

  const BalloonState& state() const { return state_; }
  const EpisodeInfo& info() const { return info_; }
  const std::vector<StrideRecord>& trajectory() const { return trajectory_; }
  const EnvironmentConfig& config() const { return config_; }
  const WindGrid& grid() const { return *grid_; }
  const Atmosphere& atmosphere() const { return atmosphere_; }
  bool done() const { return done_; }

  /// Geographic position of a plane offset from the target.
  double longitude(double x) const;
  double latitude(double y) const;

 private:
  StepResult advance_stride(const Decision& decision, const CommandTriple& command,
                            double float_history);
  WindSample true_wind(const BalloonState& state, double pressure);
  Observation observe();

  EnvironmentConfig config_;
  Atmosphere atmosphere_;
  std::shared_ptr<const WindGrid> grid_;
  std::optional<WindNoise> noise_;
  BalloonState state_;
  double start_time_ = 0.0;
  std::array<double, 3> altitude_history_{};
  std::array<double, 3> rate_history_{};
  std::array<double, 3> float_history_{};
  EpisodeInfo info_;
  std::vector<StrideRecord> trajectory_;
  bool done_ = true;
};

}  // namespace hab
