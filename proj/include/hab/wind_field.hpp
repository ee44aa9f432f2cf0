#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hab/dynamics.hpp"
#include "hab/simplex_noise.hpp"

namespace hab {

/// Pressure band the grid may span [Pa].
inline constexpr double kGridMinPressure = 2000.0;
inline constexpr double kGridMaxPressure = 17500.0;
/// Forecast cadence [s].
inline constexpr double kForecastInterval = 21600.0;

/// Gridded horizontal wind: lon x lat x pressure x time -> (v_wx, v_wy).
///
/// Values are stored row-major in (lon, lat, pressure, time, component) order,
/// the same order as the binary container.
class WindGrid {
 public:
  WindGrid() = default;

  /// Validates on construction; throws AxisError / ShapeError / FormatError.
  WindGrid(std::vector<double> lon, std::vector<double> lat, std::vector<double> pressure,
           std::vector<double> time, std::vector<float> values);

  /// Binary "WNDG" container, see docs/formats.md.
  static WindGrid load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// CSV with columns lon_deg,lat_deg,pressure_pa,time_s,vwx_ms,vwy_ms forming
  /// a complete rectangular grid (any row order).
  static WindGrid from_csv(const std::filesystem::path& path);

  /// 4-D multilinear interpolation of each component. Queries outside the
  /// grid are clamped to its edges; `clamped` (when given) reports whether
  /// that happened.
  WindSample sample(double lon, double lat, double pressure, double time,
                    bool* clamped = nullptr) const;

  /// Node value (no interpolation).
  WindSample node(std::size_t i_lon, std::size_t i_lat, std::size_t i_p, std::size_t i_t) const;

  std::span<const double> lon() const { return lon_; }
  std::span<const double> lat() const { return lat_; }
  std::span<const double> pressure() const { return pressure_; }
  std::span<const double> time() const { return time_; }
  std::span<const float> values() const { return values_; }

  bool operator==(const WindGrid&) const = default;

 private:
  std::size_t index(std::size_t i_lon, std::size_t i_lat, std::size_t i_p, std::size_t i_t) const {
    return (((i_lon * lat_.size() + i_lat) * pressure_.size() + i_p) * time_.size() + i_t) * 2;
  }
  void validate() const;

  std::vector<double> lon_;
  std::vector<double> lat_;
  std::vector<double> pressure_;
  std::vector<double> time_;
  std::vector<float> values_;
};

/// Forecast-error perturbation parameters.
struct NoiseConfig {
  double amplitude = 1.5;         // [m/s]
  double spatial_scale = 2.0;     // [deg]
  double pressure_scale = 3000.0; // [Pa]
  double time_scale = 21600.0;    // [s]
  std::uint64_t seed = 0;

  void validate() const;
};

/// Simplex-noise forecast error, one independent field per wind component.
class WindNoise {
 public:
  explicit WindNoise(const NoiseConfig& config);

  /// `sample` plus amplitude-scaled noise at the normalised coordinates.
  WindSample augment(const WindSample& sample, double lon, double lat, double pressure,
                     double time) const;

  const NoiseConfig& config() const { return config_; }

 private:
  NoiseConfig config_;
  SimplexNoise4 east_;
  SimplexNoise4 north_;
};

enum class WindRegime { kDiverse, kUniform, kStrong };

WindRegime parse_regime(const std::string& name);
std::string to_string(WindRegime regime);

struct SynthParams {
  WindRegime regime = WindRegime::kDiverse;
  double center_lon = -113.0;
  double center_lat = 1.0;
  double half_width_deg = 4.0;
  double resolution_deg = 0.4;
  std::size_t pressure_levels = 16;
  double days = 30.0;

  void validate() const;
};

/// Deterministic synthetic forecast.
///
/// diverse: direction turns 200-330 deg across the 14-21 km band (more over
///          the full pressure axis), speeds 2-15 m/s.
/// uniform: one direction within +-10 deg at every level, speeds 5-15 m/s.
/// strong:  diverse directions, speeds 25-40 m/s.
WindGrid synth(std::uint64_t seed, const SynthParams& params);

/// Bearing of a wind vector [rad], counter-clockwise from east.
double wind_direction(const WindSample& wind);

/// Largest pairwise angle between the wind directions of one grid column [rad].
double max_direction_spread(const WindGrid& grid, std::size_t i_lon, std::size_t i_lat,
                            std::size_t i_t);

}  // namespace hab
