#include "hab/wind_field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "binary_io.hpp"
#include "hab/errors.hpp"
#include "hab/seeding.hpp"

namespace hab {

namespace {

constexpr char kMagic[4] = {'W', 'N', 'D', 'G'};
constexpr std::uint16_t kVersion = 1;
constexpr double kMaxWindSpeed = 150.0;

template <typename T>
T read_le(std::istream& in) {
  return detail::read_le<T>(in, "wind grid");
}

using detail::write_le;

void check_increasing(std::span<const double> axis, const char* name) {
  if (axis.empty()) throw AxisError(std::string(name) + " axis is empty");
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!std::isfinite(axis[i])) throw AxisError(std::string(name) + " axis has non-finite entry");
    if (i > 0 && !(axis[i] > axis[i - 1])) {
      throw AxisError(std::string(name) + " axis is not strictly increasing at index " +
                      std::to_string(i));
    }
  }
}

struct Bracket {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

Bracket locate(std::span<const double> axis, double value, bool& clamped) {
  if (axis.size() == 1 || value <= axis.front()) {
    if (value < axis.front() || (axis.size() == 1 && value != axis.front())) clamped = true;
    return {0, 0, 0.0};
  }
  if (value >= axis.back()) {
    if (value > axis.back()) clamped = true;
    return {axis.size() - 1, axis.size() - 1, 0.0};
  }
  const auto upper = std::upper_bound(axis.begin(), axis.end(), value);
  const std::size_t hi = static_cast<std::size_t>(upper - axis.begin());
  const std::size_t lo = hi - 1;
  return {lo, hi, (value - axis[lo]) / (axis[hi] - axis[lo])};
}

double wrap_angle(double angle) {
  using std::numbers::pi;
  angle = std::remainder(angle, 2.0 * pi);
  return angle <= -pi ? angle + 2.0 * pi : angle;
}

// Uniform double in [0, 1) from the stream.
double unit_double(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

double uniform(std::uint64_t& state, double lo, double hi) {
  return lo + (hi - lo) * unit_double(state);
}

}  // namespace

WindGrid::WindGrid(std::vector<double> lon, std::vector<double> lat, std::vector<double> pressure,
                   std::vector<double> time, std::vector<float> values)
    : lon_(std::move(lon)),
      lat_(std::move(lat)),
      pressure_(std::move(pressure)),
      time_(std::move(time)),
      values_(std::move(values)) {
  validate();
}

void WindGrid::validate() const {
  check_increasing(lon_, "longitude");
  check_increasing(lat_, "latitude");
  check_increasing(pressure_, "pressure");
  check_increasing(time_, "time");
  if (pressure_.front() < kGridMinPressure || pressure_.back() > kGridMaxPressure) {
    throw AxisError("pressure axis must lie within [2000, 17500] Pa");
  }
  const std::size_t expected = lon_.size() * lat_.size() * pressure_.size() * time_.size() * 2;
  if (values_.size() != expected) {
    throw ShapeError("wind value array has " + std::to_string(values_.size()) +
                     " entries, axes imply " + std::to_string(expected));
  }
  for (std::size_t i = 0; i < values_.size(); i += 2) {
    const double u = values_[i];
    const double v = values_[i + 1];
    if (!std::isfinite(u) || !std::isfinite(v) || std::hypot(u, v) >= kMaxWindSpeed) {
      throw FormatError("wind value at flat index " + std::to_string(i / 2) +
                        " is non-finite or exceeds 150 m/s");
    }
  }
}

WindGrid WindGrid::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open wind grid " + path.string());

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path.string() + ": bad magic, not a WNDG wind grid");
  }
  const auto version = read_le<std::uint16_t>(in);
  if (version != kVersion) {
    throw FormatError(path.string() + ": unsupported wind grid version " + std::to_string(version));
  }
  std::array<std::uint32_t, 4> lengths{};
  for (auto& n : lengths) n = read_le<std::uint32_t>(in);

  std::array<std::vector<double>, 4> axes;
  for (std::size_t a = 0; a < 4; ++a) {
    axes[a].resize(lengths[a]);
    for (auto& x : axes[a]) x = read_le<double>(in);
  }
  const std::size_t count =
      std::size_t{lengths[0]} * lengths[1] * lengths[2] * lengths[3] * 2;
  std::vector<float> values(count);
  for (auto& x : values) x = read_le<float>(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ShapeError(path.string() + ": trailing bytes after wind value array");
  }
  return WindGrid(std::move(axes[0]), std::move(axes[1]), std::move(axes[2]), std::move(axes[3]),
                  std::move(values));
}

void WindGrid::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write wind grid " + path.string());
  out.write(kMagic, 4);
  write_le<std::uint16_t>(out, kVersion);
  for (const auto* axis : {&lon_, &lat_, &pressure_, &time_}) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(axis->size()));
  }
  for (const auto* axis : {&lon_, &lat_, &pressure_, &time_}) {
    for (double x : *axis) write_le<double>(out, x);
  }
  for (float x : values_) write_le<float>(out, x);
  if (!out) throw FormatError("failed writing wind grid " + path.string());
}

WindGrid WindGrid::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open CSV " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "lon_deg,lat_deg,pressure_pa,time_s,vwx_ms,vwy_ms") {
    throw FormatError(path.string() +
                      ": header must be lon_deg,lat_deg,pressure_pa,time_s,vwx_ms,vwy_ms");
  }

  using Key = std::tuple<double, double, double, double>;
  std::map<Key, std::pair<float, float>> rows;
  std::array<std::vector<double>, 4> axes;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 6> fields{};
    std::size_t count = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (count == fields.size()) {
        throw ShapeError(path.string() + ": row " + std::to_string(row_number) +
                         " has more than 6 columns");
      }
      char* end = nullptr;
      fields[count] = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw FormatError(path.string() + ": row " + std::to_string(row_number) +
                          " has a non-numeric cell '" + cell + "'");
      }
      ++count;
    }
    if (count != fields.size()) {
      throw ShapeError(path.string() + ": row " + std::to_string(row_number) + " has " +
                       std::to_string(count) + " columns, expected 6");
    }
    const Key key{fields[0], fields[1], fields[2], fields[3]};
    if (!rows.emplace(key, std::pair{static_cast<float>(fields[4]), static_cast<float>(fields[5])})
             .second) {
      throw ShapeError(path.string() + ": row " + std::to_string(row_number) +
                       " duplicates an earlier grid node");
    }
    for (std::size_t a = 0; a < 4; ++a) axes[a].push_back(fields[a]);
  }
  for (auto& axis : axes) {
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  }
  const std::size_t nodes = axes[0].size() * axes[1].size() * axes[2].size() * axes[3].size();
  if (rows.size() != nodes) {
    throw ShapeError(path.string() + ": " + std::to_string(rows.size()) +
                     " rows do not form a complete rectangular grid of " + std::to_string(nodes) +
                     " nodes (last row " + std::to_string(row_number) + ")");
  }
  std::vector<float> values;
  values.reserve(nodes * 2);
  for (double lo : axes[0])
    for (double la : axes[1])
      for (double p : axes[2])
        for (double t : axes[3]) {
          const auto& [u, v] = rows.at(Key{lo, la, p, t});
          values.push_back(u);
          values.push_back(v);
        }
  return WindGrid(std::move(axes[0]), std::move(axes[1]), std::move(axes[2]), std::move(axes[3]),
                  std::move(values));
}

WindSample WindGrid::node(std::size_t i_lon, std::size_t i_lat, std::size_t i_p,
                          std::size_t i_t) const {
  const std::size_t k = index(i_lon, i_lat, i_p, i_t);
  return {values_[k], values_[k + 1]};
}

WindSample WindGrid::sample(double lon, double lat, double pressure, double time,
                            bool* clamped) const {
  bool was_clamped = false;
  const std::array<Bracket, 4> b{locate(lon_, lon, was_clamped), locate(lat_, lat, was_clamped),
                                 locate(pressure_, pressure, was_clamped),
                                 locate(time_, time, was_clamped)};
  if (clamped) *clamped = was_clamped;

  double u = 0.0;
  double v = 0.0;
  for (int corner = 0; corner < 16; ++corner) {
    double weight = 1.0;
    std::array<std::size_t, 4> at{};
    for (int axis = 0; axis < 4; ++axis) {
      const bool upper = (corner >> axis) & 1;
      weight *= upper ? b[axis].frac : 1.0 - b[axis].frac;
      at[axis] = upper ? b[axis].hi : b[axis].lo;
    }
    if (weight == 0.0) continue;
    const std::size_t k = index(at[0], at[1], at[2], at[3]);
    u += weight * values_[k];
    v += weight * values_[k + 1];
  }
  return {u, v};
}

void NoiseConfig::validate() const {
  if (!(amplitude >= 0.0)) throw ConfigError("noise amplitude must be non-negative");
  if (!(spatial_scale > 0.0) || !(pressure_scale > 0.0) || !(time_scale > 0.0)) {
    throw ConfigError("noise scales must be positive");
  }
}

WindNoise::WindNoise(const NoiseConfig& config)
    : config_(config), east_(derive_seed(config.seed, 0)), north_(derive_seed(config.seed, 1)) {
  config_.validate();
}

WindSample WindNoise::augment(const WindSample& sample, double lon, double lat, double pressure,
                              double time) const {
  if (config_.amplitude == 0.0) return sample;
  const double x = lon / config_.spatial_scale;
  const double y = lat / config_.spatial_scale;
  const double z = pressure / config_.pressure_scale;
  const double w = time / config_.time_scale;
  return {sample.v_wx + config_.amplitude * east_(x, y, z, w),
          sample.v_wy + config_.amplitude * north_(x, y, z, w)};
}

WindRegime parse_regime(const std::string& name) {
  if (name == "diverse") return WindRegime::kDiverse;
  if (name == "uniform") return WindRegime::kUniform;
  if (name == "strong") return WindRegime::kStrong;
  throw ConfigError("unknown wind regime '" + name + "' (expected diverse, uniform or strong)");
}

std::string to_string(WindRegime regime) {
  switch (regime) {
    case WindRegime::kDiverse:
      return "diverse";
    case WindRegime::kUniform:
      return "uniform";
    case WindRegime::kStrong:
      return "strong";
  }
  return "unknown";
}

void SynthParams::validate() const {
  if (!(half_width_deg > 0.0) || !(resolution_deg > 0.0) || !(days > 0.0)) {
    throw ConfigError("synthetic wind extents must be positive");
  }
  if (pressure_levels < 12) throw ConfigError("synthetic wind needs at least 12 pressure levels");
}

WindGrid synth(std::uint64_t seed, const SynthParams& params) {
  using std::numbers::pi;
  params.validate();
  constexpr double kDeg = pi / 180.0;

  const auto steps = static_cast<std::size_t>(std::lround(params.half_width_deg / params.resolution_deg));
  std::vector<double> lon, lat;
  for (std::size_t i = 0; i <= 2 * steps; ++i) {
    const double offset = (static_cast<double>(i) - static_cast<double>(steps)) * params.resolution_deg;
    lon.push_back(params.center_lon + offset);
    lat.push_back(params.center_lat + offset);
  }
  std::vector<double> pressure(params.pressure_levels);
  for (std::size_t k = 0; k < pressure.size(); ++k) {
    pressure[k] = kGridMinPressure + (kGridMaxPressure - kGridMinPressure) * static_cast<double>(k) /
                                         static_cast<double>(pressure.size() - 1);
  }
  const auto time_nodes = static_cast<std::size_t>(std::ceil(params.days * 86400.0 / kForecastInterval)) + 1;
  std::vector<double> time(time_nodes);
  for (std::size_t j = 0; j < time_nodes; ++j) time[j] = static_cast<double>(j) * kForecastInterval;

  std::uint64_t rng = seed;
  const bool uniform_regime = params.regime == WindRegime::kUniform;
  const double min_speed = params.regime == WindRegime::kStrong ? 25.0 : uniform_regime ? 5.0 : 2.0;
  const double max_speed = params.regime == WindRegime::kStrong ? 40.0 : 15.0;
  const double turn_sign = unit_double(rng) < 0.5 ? -1.0 : 1.0;
  // Rotation is specified across the operating band (~14100 to ~4700 Pa).
  constexpr double kBandLowPressure = 4500.0;
  constexpr double kBandHighPressure = 14500.0;

  // Per time-node base direction and turn span, as bounded random walks.
  std::vector<double> base(time_nodes), span(time_nodes);
  base[0] = uniform(rng, 0.0, 2.0 * pi);
  span[0] = uniform(rng, 200.0, 330.0) * kDeg;
  for (std::size_t j = 1; j < time_nodes; ++j) {
    base[j] = base[j - 1] + uniform(rng, -20.0, 20.0) * kDeg;
    span[j] = std::clamp(span[j - 1] + uniform(rng, -25.0, 25.0) * kDeg, 200.0 * kDeg, 330.0 * kDeg);
  }
  // Per level speed fraction and (uniform regime) direction offset, random-walking in time.
  const std::size_t levels = pressure.size();
  std::vector<double> speed(levels * time_nodes), level_offset(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    level_offset[k] = uniform(rng, -7.0, 7.0) * kDeg;
    double s = unit_double(rng);
    for (std::size_t j = 0; j < time_nodes; ++j) {
      if (j > 0) s = std::clamp(s + uniform(rng, -0.2, 0.2), 0.0, 1.0);
      speed[k * time_nodes + j] = s;
    }
  }
  const SimplexNoise4 direction_noise(derive_seed(seed, 100));
  const SimplexNoise4 speed_noise(derive_seed(seed, 101));

  std::vector<float> values;
  values.reserve(lon.size() * lat.size() * levels * time_nodes * 2);
  for (std::size_t a = 0; a < lon.size(); ++a) {
    for (std::size_t b = 0; b < lat.size(); ++b) {
      for (std::size_t k = 0; k < levels; ++k) {
        const double band_fraction =
            (kBandHighPressure - pressure[k]) / (kBandHighPressure - kBandLowPressure);
        for (std::size_t j = 0; j < time_nodes; ++j) {
          const double nx = (lon[a] - params.center_lon) / 3.0;
          const double ny = (lat[b] - params.center_lat) / 3.0;
          const double nz = static_cast<double>(k) * 0.15;
          const double nw = static_cast<double>(j) * 0.25;
          double direction = base[j] + 3.0 * kDeg * direction_noise(nx, ny, nz, nw);
          if (uniform_regime) {
            direction += level_offset[k];
          } else {
            direction += turn_sign * span[j] * band_fraction;
          }
          const double fraction =
              std::clamp(speed[k * time_nodes + j] + 0.1 * speed_noise(nx, ny, nz, nw), 0.0, 1.0);
          const double magnitude = min_speed + (max_speed - min_speed) * fraction;
          values.push_back(static_cast<float>(magnitude * std::cos(direction)));
          values.push_back(static_cast<float>(magnitude * std::sin(direction)));
        }
      }
    }
  }
  return WindGrid(std::move(lon), std::move(lat), std::move(pressure), std::move(time),
                  std::move(values));
}

double wind_direction(const WindSample& wind) { return std::atan2(wind.v_wy, wind.v_wx); }

double max_direction_spread(const WindGrid& grid, std::size_t i_lon, std::size_t i_lat,
                            std::size_t i_t) {
  double spread = 0.0;
  const std::size_t levels = grid.pressure().size();
  for (std::size_t p = 0; p < levels; ++p) {
    const double first = wind_direction(grid.node(i_lon, i_lat, p, i_t));
    for (std::size_t q = p + 1; q < levels; ++q) {
      const double second = wind_direction(grid.node(i_lon, i_lat, q, i_t));
      spread = std::max(spread, std::abs(wrap_angle(first - second)));
    }
  }
  return spread;
}

}  // namespace hab
