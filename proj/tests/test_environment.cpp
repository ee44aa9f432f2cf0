#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "hab/errors.hpp"
#include "hab/environment.hpp"

using namespace hab;
using std::numbers::pi;

namespace {

EnvironmentConfig small_config() {
  EnvironmentConfig c;
  c.wind.seed = 5;
  c.wind.synth.half_width_deg = 1.2;
  c.wind.synth.days = 4.0;
  return c;
}

std::shared_ptr<const WindGrid> small_grid() {
  static const auto grid = make_wind_grid(small_config().wind);
  return grid;
}

StrideRecord at_distance(double km) {
  StrideRecord r{};
  r.distance_km = km;
  return r;
}

}  // namespace

TEST_CASE("reward shape") {
  const RewardParams p;
  CHECK(reward(0.0, p) == 1.0);
  CHECK(reward(10.0, p) == 1.0);
  CHECK(reward(49.999, p) == 1.0);
  CHECK(reward(50.0, p) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(reward(150.0, p) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(reward(250.0, p) == doctest::Approx(0.1).epsilon(1e-12));
  double previous = 2.0;
  for (int i = 0; i < 1000; ++i) {
    const double r = reward(0.5 * i, p);
    CHECK(r > 0.0);
    CHECK(r <= 1.0);
    CHECK(r <= previous);
    previous = r;
  }
  RewardParams bad;
  bad.cliff = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("bearing error convention") {
  // At the target the reference direction is east.
  CHECK(bearing_error({1.0, 0.0}, 0.0, 0.0) == doctest::Approx(0.0));
  CHECK(bearing_error({0.0, 3.0}, 0.0, 0.0) == doctest::Approx(pi / 2));
  // Balloon east of the target: target lies west.
  CHECK(bearing_error({-2.0, 0.0}, 1000.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(bearing_error({2.0, 0.0}, 1000.0, 0.0)) == doctest::Approx(pi));
  CHECK(bearing_error({2.0, 0.0}, 1000.0, 0.0) == doctest::Approx(pi));
  // Target to the north, wind to the east: wind is clockwise of the target.
  CHECK(bearing_error({1.0, 0.0}, 0.0, 0.0, 0.0, 5.0) == doctest::Approx(-pi / 2));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int i = 0; i < 1000; ++i) {
    const double e = bearing_error({u(rng), u(rng)}, 1000.0 * u(rng), 1000.0 * u(rng));
    CHECK(e > -pi);
    CHECK(e <= pi);
  }
}

TEST_CASE("time within 50 km") {
  std::vector<StrideRecord> rows;
  for (int i = 0; i < 216; ++i) rows.push_back(at_distance(i < 54 ? 10.0 : 80.0));
  CHECK(tw50(rows) == doctest::Approx(0.25));
  rows.resize(54);
  CHECK(tw50(rows) == 1.0);
  CHECK(tw50(rows, 216) == doctest::Approx(0.25));
  rows.push_back(at_distance(50.0));
  CHECK(tw50(rows) == doctest::Approx(54.0 / 55.0));
  CHECK_THROWS_AS(tw50(std::vector<StrideRecord>{}), ConfigError);
}

TEST_CASE("reset is deterministic and starts neutrally buoyant at rest") {
  Environment a(small_config(), small_grid());
  Environment b(small_config(), small_grid());
  const Observation oa = a.reset(42);
  const Observation ob = b.reset(42);
  CHECK(oa == ob);
  CHECK(a.reset(43) != oa);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    a.reset(seed);
    const BalloonState& s = a.state();
    CHECK(s.h >= 15000.0);
    CHECK(s.h <= 20000.0);
    CHECK(s.h_dot == 0.0);
    CHECK(s.t == 0.0);
    CHECK(s.m_p == 1.6);
    CHECK(s.m_s == 0.4);
    CHECK(std::abs(s.x) <= 0.3 * 111320.0 + 1e-6);
    CHECK(std::abs(s.y) <= 0.3 * 111320.0 + 1e-6);
    const double acc =
        vertical_acceleration(s, a.atmosphere().sample(s.h), a.config().physics);
    CHECK(std::abs(acc) < 1e-6);
  }
}

TEST_CASE("observation layout") {
  Environment env(small_config(), small_grid());
  const Observation o = env.reset(8);
  const BalloonState& s = env.state();
  CHECK(o.size() == 71);
  for (std::size_t k = 0; k < kWindLevels; ++k) {
    CHECK(o[obs::kSpeed + k] >= 0.0);
    CHECK(o[obs::kBearing + k] > -pi);
    CHECK(o[obs::kBearing + k] <= pi);
  }
  CHECK(o[obs::kAltitude] == s.h);
  CHECK(o[obs::kAscentRate] == 0.0);
  const double d = std::hypot(s.x, s.y);
  CHECK(o[obs::kDistance] == doctest::Approx(d));
  CHECK(o[obs::kHeadingSin] == doctest::Approx(-s.y / d));
  CHECK(o[obs::kHeadingCos] == doctest::Approx(-s.x / d));
  const AtmosphereSample atm = env.atmosphere().sample(s.h);
  const double volume = s.n * 8.31446 * atm.temperature / atm.pressure;
  CHECK(o[obs::kVolume] == doctest::Approx(volume).epsilon(1e-12));
  const double radius = std::cbrt(3.0 * volume / (4.0 * pi));
  CHECK(o[obs::kDragArea] == doctest::Approx(pi * radius * radius).epsilon(1e-12));
  CHECK(o[obs::kTotalMass] == doctest::Approx(1.6 + 0.4 + s.n * 0.0040026));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(o[obs::kAltitudeHistory + i] == s.h);
    CHECK(o[obs::kAscentRateHistory + i] == 0.0);
    CHECK(o[obs::kFloatHistory + i] == -1.0);
  }
  CHECK(o[obs::kSand] == 0.4);
  CHECK(o[obs::kHelium] == s.n);

  const auto f = env.normalize(o);
  CHECK(f[obs::kSand] == 1.0);
  CHECK(f[obs::kHelium] == 1.0);
  CHECK(f[obs::kTotalMass] == doctest::Approx(1.0));
  CHECK(f[obs::kAltitude] == doctest::Approx(s.h / 21000.0));
  CHECK(f[obs::kDistance] == doctest::Approx(d / 200000.0));
}

TEST_CASE("forecast features match the grid at the balloon position") {
  EnvironmentConfig c = small_config();
  c.episode.start_time_min = 3600.0;
  c.episode.start_time_max = 3600.0;
  Environment env(c, small_grid());
  env.reset(19);
  const StepResult r = env.step({17000.0, 2.0, -1.0});
  const BalloonState& s = env.state();
  const double lon = 1.0 + s.x / (111320.0 * std::cos(pi / 180.0)) - 114.0;
  const double lat = 1.0 + s.y / 111320.0;
  for (std::size_t k = 0; k < kWindLevels; ++k) {
    const double p = 5000.0 + 9000.0 * static_cast<double>(k) / 24.0;
    const WindSample w = env.grid().sample(lon, lat, p, 3600.0 + 1200.0);
    CHECK(r.observation[obs::kSpeed + k] == doctest::Approx(std::hypot(w.v_wx, w.v_wy)).epsilon(1e-12));
    CHECK(r.observation[obs::kBearing + k] == doctest::Approx(bearing_error(w, s.x, s.y)).epsilon(1e-12));
  }
}

TEST_CASE("episode bookkeeping and truncation") {
  Environment env(small_config(), small_grid());
  env.reset(3);
  const double n0 = env.state().n;
  std::size_t steps = 0;
  StepResult r;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  do {
    // Mostly gentle commands so the episode usually runs to the time limit.
    CommandTriple c = CommandTriple::from_unit({u(rng) * 0.2, 1.0, steps % 7 == 0 ? -1.0 : 1.0});
    r = env.step(c);
    ++steps;
    CHECK(env.state().n + env.info().vented_mols == doctest::Approx(n0).epsilon(1e-12));
    CHECK(env.state().m_s + env.info().dropped_kg == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(env.state().n >= 0.0);
    CHECK(env.state().m_s >= 0.0);
    CHECK(env.trajectory().size() == steps);
    CHECK(env.state().t == doctest::Approx(1200.0 * static_cast<double>(steps)));
  } while (!r.terminated && !r.truncated);
  CHECK(steps <= 216);
  if (r.truncated) {
    CHECK(steps == 216);
    CHECK(env.info().termination == Termination::kTime);
  } else {
    CHECK(env.info().termination == Termination::kResources);
  }
  CHECK(env.info().tw50() == doctest::Approx(tw50(env.trajectory(), 216)));
  double total = 0.0;
  for (const auto& row : env.trajectory()) total += row.reward;
  CHECK(env.info().cumulative_reward == doctest::Approx(total));
  CHECK_THROWS_AS(env.step({17000.0, 1.0, -1.0}), StepAfterDone);
}

TEST_CASE("doing nothing runs to the time limit") {
  Environment env(small_config(), small_grid());
  env.reset(11);
  StepResult r;
  for (int i = 0; i < 216; ++i) {
    CHECK_FALSE(env.done());
    r = env.step_action(action::DoNothing{});
    CHECK_FALSE(r.terminated);
    CHECK(r.truncated == (i == 215));
  }
  CHECK(env.done());
  CHECK(env.info().termination == Termination::kTime);
  CHECK(env.info().strides == 216);
  CHECK_THROWS_AS(env.step_action(action::DoNothing{}), StepAfterDone);
}

TEST_CASE("float flag enters the history and over-asking for sand terminates") {
  Environment env(small_config(), small_grid());
  env.reset(12);
  StepResult r = env.step({17000.0, 1.0, 1.0});
  CHECK(r.observation[obs::kFloatHistory] == 1.0);
  CHECK(r.observation[obs::kFloatHistory + 1] == -1.0);
  r = env.step_action(action::Ballast{1.0});
  CHECK(r.terminated);
  CHECK(env.state().m_s == 0.0);
  CHECK(env.info().termination == Termination::kResources);
}

TEST_CASE("configuration checks against the grid") {
  EnvironmentConfig c = small_config();
  c.episode.init_offset_deg = 2.0;
  CHECK_THROWS_AS(Environment(c, small_grid()), ConfigError);
  c = small_config();
  c.episode.start_time_max = 86400.0 * 2;
  CHECK_THROWS_AS(Environment(c, small_grid()), ConfigError);
  c = small_config();
  c.episode.stride = 1000.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(Environment(small_config(), nullptr), ConfigError);
}

TEST_CASE("trajectory CSV") {
  Environment env(small_config(), small_grid());
  env.reset(2);
  env.step({18000.0, 3.0, -1.0});
  env.step_action(action::Vent{0.5});
  const auto path = std::filesystem::temp_directory_path() / "hab_unit_tests" / "traj.csv";
  std::filesystem::create_directories(path.parent_path());
  write_trajectory_csv(env.trajectory(), path);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "t_s,x_m,y_m,h_m,h_dot_ms,a0_m,a1,a2,action,vented_mol,dropped_kg,reward,dist_km");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 12);
  }
  CHECK(rows == 2);
}
