// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. The learning criteria share one training run.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hab/atmosphere.hpp"
#include "hab/dynamics.hpp"
#include "hab/environment.hpp"
#include "hab/resource_solver.hpp"
#include "hab/sac/agent.hpp"

using namespace hab;
namespace fs = std::filesystem;

namespace {

const PhysicsConstants kC{};

int failures = 0;
std::ofstream report_file;

void report(bool pass, const std::string& name, const std::string& detail, double seconds) {
  char line[1024];
  std::snprintf(line, sizeof line, "%s %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", name.c_str(),
                detail.c_str(), seconds);
  std::fputs(line, stdout);
  std::fflush(stdout);
  report_file << line << std::flush;
  failures += !pass;
}

std::string format(const char* fmt, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, fmt, args...);
  return buffer;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int habctl(const std::string& args, const fs::path& log) {
  const std::string command =
      std::string(HABCTL_PATH) + " " + args + " >> " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

BalloonState neutral_state(double h) {
  BalloonState s;
  s.h = h;
  s.m_p = 1.6;
  s.m_s = 0.4;
  s.n = (s.m_p + s.m_s) / (kC.molar_mass_air - kC.molar_mass_helium);
  return s;
}

// ---------------------------------------------------------------------------

void atmosphere_oracle() {
  Timer timer;
  struct Row {
    double h, t, p;
  };
  // U.S. Standard Atmosphere 1976 published values.
  const Row table[] = {{0.0, 288.15, 101325.0},    {5000.0, 255.65, 54019.9},
                       {11000.0, 216.65, 22632.1}, {15000.0, 216.65, 12044.6},
                       {20000.0, 216.65, 5474.89}, {25000.0, 221.65, 2511.02},
                       {30000.0, 226.65, 1171.87}};
  const Atmosphere atm = Atmosphere::standard(kC);
  double worst_t = 0.0, worst_p = 0.0;
  for (const Row& row : table) {
    const AtmosphereSample s = atm.sample(row.h);
    worst_t = std::max(worst_t, std::abs(s.temperature - row.t));
    worst_p = std::max(worst_p, std::abs(s.pressure - row.p) / row.p);
  }
  report(worst_t <= 0.01 && worst_p <= 1e-3, "atmosphere_oracle",
         format("max |dT| = %.2e K, max |dP|/P = %.2e", worst_t, worst_p), timer.seconds());
}

void solver_fidelity() {
  Timer timer;
  const Atmosphere atm = Atmosphere::standard(kC);
  // Settled means after the drag transient: the velocity time constant
  // m / (rho c_d A |r|) is under 20 s for every case, so 120 s is > 6 of them.
  constexpr double kSettle = 120.0, kStride = 1200.0, kDt = 1.0;
  double worst = 0.0, worst_end = 0.0;
  std::string worst_case;
  bool ok = true;
  for (double h : {15000.0, 17000.0, 19000.0, 21000.0}) {
    for (double rate : {-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0}) {
      BalloonState s = neutral_state(h);
      const AtmosphereSample here = atm.sample(h);
      if (rate < 0.0) {
        s.n = resources::mols_for_ascent(s, here, kC, rate);
      } else {
        s.m_s = resources::sand_for_ascent(s, here, kC, rate);
      }
      double settled = std::nan("");
      for (double t = kDt; t <= kStride + 1e-9; t += kDt) {
        s = advance(s, {}, kDt, atm, kC);
        if (std::abs(t - kSettle) < 1e-9) settled = s.h_dot;
      }
      const double tolerance = std::max(0.05 * std::abs(rate), 0.05);
      const double error = std::abs(settled - rate);
      ok = ok && error <= tolerance;
      if (error / tolerance > worst) {
        worst = error / tolerance;
        worst_case = format("%.1f m/s at %.0f km", rate, h / 1000.0);
      }
      worst_end = std::max(worst_end, std::abs(s.h_dot - rate) / std::abs(rate));
    }
  }
  report(ok, "solver_fidelity",
         format("32 cases, worst error %.2f of tolerance (%s); end-of-stride drift up to %.1f%% from "
                "the altitude change",
                worst, worst_case.c_str(), 100.0 * worst_end),
         timer.seconds());
}

void float_identity() {
  Timer timer;
  const Atmosphere atm = Atmosphere::standard(kC);
  const double identity = 2.0 / (kC.molar_mass_air - kC.molar_mass_helium);
  double worst_acc = 0.0, worst_identity = 0.0;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> altitude(14000.0, 21000.0), excess(1.0, 1.3),
      deficit(0.85, 1.0);
  for (int i = 0; i < 200; ++i) {
    BalloonState s = neutral_state(altitude(rng));
    s.n *= (i % 2 == 0) ? excess(rng) : deficit(rng);
    const AtmosphereSample here = atm.sample(s.h);
    const resources::FloatAdjustment trim = resources::float_adjustment(s, here, kC);
    if (const auto* vent = std::get_if<resources::VentTo>(&trim)) {
      worst_identity = std::max(worst_identity, std::abs(vent->mols - identity) / identity);
      s.n = vent->mols;
    } else {
      s.m_s = std::get<resources::BallastTo>(trim).sand;
    }
    worst_acc = std::max(worst_acc, std::abs(vertical_acceleration(s, here, kC)));
  }
  report(worst_acc < 1e-9 && worst_identity <= 1e-12, "float_identity",
         format("200 trims, max |acc| = %.2e m/s^2, max n_calc relative error = %.2e", worst_acc,
                worst_identity),
         timer.seconds());
}

void reward_shape() {
  Timer timer;
  const RewardParams p;
  bool inside = true;
  for (int i = 0; i < 500; ++i) inside = inside && reward(0.1 * i, p) == 1.0;
  const double r50 = reward(50.0, p), r150 = reward(150.0, p);
  bool monotone = true;
  double previous = r50;
  for (int i = 1; i < 1000; ++i) {
    const double r = reward(50.0 + 0.5 * i, p);
    monotone = monotone && r <= previous;
    previous = r;
  }
  const bool ok = inside && std::abs(r50 - 0.4) < 1e-12 && std::abs(r150 - 0.2) < 1e-12 && monotone;
  report(ok, "reward_function",
         format("R(<50) = 1: %s, R(50) = %.12g, R(150) = %.12g, monotone over 1000 points: %s",
                inside ? "yes" : "no", r50, r150, monotone ? "yes" : "no"),
         timer.seconds());
}

// ---------------------------------------------------------------------------

sac::Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  sac::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

template <typename F>
sac::Vector central_differences(sac::Vector& params, F loss) {
  constexpr double h = 1e-6;
  sac::Vector g(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = loss();
    params[i] = keep - h;
    const double down = loss();
    params[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Largest component error relative to the gradient's largest component.
double max_relative_error(const sac::Vector& analytic, const sac::Vector& numeric) {
  const double scale =
      std::max({analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff(), 1e-12});
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

void gradient_checks() {
  Timer timer;
  constexpr Eigen::Index kObs = 5, kAct = 3, kBatch = 8;
  sac::SacConfig config;
  config.hidden = {12, 12};
  config.batch_size = kBatch;
  config.buffer_capacity = 64;
  double worst_q = 0.0, worst_pi = 0.0, worst_alpha = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    sac::SacAgent agent(kObs, kAct, config, seed);
    agent.actor().params() *= 2.0;
    agent.set_log_alpha(std::log(0.1 * static_cast<double>(seed)));
    std::mt19937_64 rng(100 + seed);
    sac::Batch batch;
    batch.observations = gaussian(kObs, kBatch, rng, 1.0);
    batch.actions = gaussian(kAct, kBatch, rng, 0.5).array().tanh();
    batch.rewards = gaussian(kBatch, 1, rng, 1.0);
    batch.next_observations = gaussian(kObs, kBatch, rng, 1.0);
    batch.done = sac::Vector::Zero(kBatch);
    batch.done[0] = 1.0;

    const sac::Vector targets = agent.critic_targets(batch, gaussian(kAct, kBatch, rng, 1.0));
    sac::Mlp critic = agent.critic2();
    const sac::LossGradient q = agent.critic_loss(critic, batch, targets);
    worst_q = std::max(worst_q, max_relative_error(q.gradient, central_differences(critic.params(), [&] {
                                                     return agent.critic_loss(critic, batch, targets).loss;
                                                   })));

    const sac::Matrix noise = gaussian(kAct, kBatch, rng, 1.0);
    sac::Vector log_prob;
    const sac::LossGradient pi = agent.actor_loss(batch, noise, &log_prob);
    worst_pi = std::max(worst_pi, max_relative_error(pi.gradient, central_differences(agent.actor().params(), [&] {
                                                       return agent.actor_loss(batch, noise).loss;
                                                     })));

    const sac::LossGradient alpha = agent.alpha_loss(log_prob);
    sac::Vector log_alpha = sac::Vector::Constant(1, agent.log_alpha());
    const double keep = log_alpha[0];
    const sac::Vector numeric = central_differences(log_alpha, [&] {
      agent.set_log_alpha(log_alpha[0]);
      return agent.alpha_loss(log_prob).loss;
    });
    agent.set_log_alpha(keep);
    worst_alpha = std::max(worst_alpha, max_relative_error(alpha.gradient, numeric));
  }
  const double worst = std::max({worst_q, worst_pi, worst_alpha});
  report(worst < 1e-4, "gradient_checks",
         format("max relative error J_Q %.2e, J_pi %.2e, J_alpha %.2e", worst_q, worst_pi,
                worst_alpha),
         timer.seconds());
}

// ---------------------------------------------------------------------------

struct LearningRun {
  bool ok = false;
  std::string error;
  std::vector<std::string> terminations;
  double trained_diverse = 0.0;
  double trained_uniform = 0.0;
  double baseline = 0.0;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
};

constexpr std::size_t kTrainEpisodes = 300;
constexpr std::size_t kEvalEpisodes = 50;

LearningRun learning_run(const fs::path& dir) {
  LearningRun run;
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path config = dir / "config.json";
  std::ofstream(config) << R"({"sac": {"batch_size": 128}, "train": {"episodes": 300, "checkpoint_every": 100}})";
  const fs::path log = dir / "habctl.log";
  const std::string common = "--config " + config.string();

  Timer train_timer;
  if (habctl("train " + common + " --seed 7 --out " + (dir / "train").string(), log) != 0 ||
      habctl("train " + common + " --seed 7 --episodes 0 --out " + (dir / "baseline").string(),
             log) != 0) {
    run.error = "training failed, see " + log.string();
    return run;
  }
  run.train_seconds = train_timer.seconds();

  Timer eval_timer;
  const std::string eval = "eval " + common + " --seed 11 --episodes " + std::to_string(kEvalEpisodes);
  if (habctl(eval + " --checkpoint " + (dir / "train" / "final.sack").string() + " --out " +
                 (dir / "eval_diverse").string(),
             log) != 0 ||
      habctl(eval + " --regime uniform --checkpoint " + (dir / "train" / "final.sack").string() +
                 " --out " + (dir / "eval_uniform").string(),
             log) != 0 ||
      habctl(eval + " --checkpoint " + (dir / "baseline" / "final.sack").string() + " --out " +
                 (dir / "eval_baseline").string(),
             log) != 0) {
    run.error = "evaluation failed, see " + log.string();
    return run;
  }
  run.eval_seconds = eval_timer.seconds();

  auto tw50 = [&](const char* name) {
    return nlohmann::json::parse(slurp(dir / name / "report.json"))["tw50_mean"].get<double>();
  };
  run.trained_diverse = tw50("eval_diverse");
  run.trained_uniform = tw50("eval_uniform");
  run.baseline = tw50("eval_baseline");

  std::istringstream metrics(slurp(dir / "train" / "metrics.csv"));
  std::string line;
  std::getline(metrics, line);
  std::size_t column = 0;
  {
    std::istringstream header(line);
    std::string name;
    for (std::size_t i = 0; std::getline(header, name, ','); ++i)
      if (name == "termination_reason") column = i;
  }
  while (std::getline(metrics, line)) {
    std::istringstream row(line);
    std::string field;
    for (std::size_t i = 0; i <= column; ++i) std::getline(row, field, ',');
    run.terminations.push_back(field);
  }
  run.ok = run.terminations.size() == kTrainEpisodes;
  if (!run.ok) run.error = "metrics.csv has " + std::to_string(run.terminations.size()) + " rows";
  return run;
}

double resource_fraction(const std::vector<std::string>& terminations, std::size_t begin,
                         std::size_t end) {
  std::size_t count = 0;
  for (std::size_t i = begin; i < end; ++i) count += terminations[i] == "resources";
  return static_cast<double>(count) / static_cast<double>(end - begin);
}

void learning_criteria(const fs::path& workdir) {
  const LearningRun run = learning_run(workdir / "learning");
  if (!run.ok) {
    for (const char* name : {"resource_conservation", "station_keeping", "uniform_negative_control"})
      report(false, name, run.error, 0.0);
    return;
  }
  const double early = resource_fraction(run.terminations, 0, 25);
  const double late = resource_fraction(run.terminations, 200, 300);
  report(late < 0.5 * early, "resource_conservation",
         format("resource terminations %.0f%% over episodes 0-25, %.0f%% over 200-300", 100.0 * early,
                100.0 * late),
         run.train_seconds);
  report(run.trained_diverse >= 2.0 * run.baseline && run.trained_diverse >= 0.10, "station_keeping",
         format("TW50 after %zu episodes %.3f vs frozen random policy %.3f over %zu eval episodes",
                kTrainEpisodes, run.trained_diverse, run.baseline, kEvalEpisodes),
         run.eval_seconds);
  report(run.trained_uniform < run.trained_diverse, "uniform_negative_control",
         format("TW50 uniform %.3f vs diverse %.3f", run.trained_uniform, run.trained_diverse), 0.0);
}

// ---------------------------------------------------------------------------

void determinism(const fs::path& workdir) {
  Timer timer;
  const fs::path dir = workdir / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path config = dir / "config.json";
  std::ofstream(config) << R"({"wind": {"seed": 4, "half_width_deg": 1.5, "days": 5},
    "sac": {"hidden": [32, 32], "batch_size": 32, "warmup_strides": 150},
    "train": {"episodes": 3, "checkpoint_every": 0}})";
  const fs::path script = dir / "flight.txt";
  std::ofstream(script) << "cmd 18500 2 -1\nwait 3\nfloat\nact 0.2 -0.5 -1\nballast 0.02\nvent 0.3\nfloat\n";
  const fs::path log = dir / "habctl.log";
  const std::string common = "--config " + config.string() + " --seed 5";

  bool ran = true;
  for (const char* copy : {"a", "b"}) {
    const fs::path out = dir / copy;
    ran = ran &&
          habctl("simulate " + common + " --script " + script.string() + " --strides 30 --out " +
                     (out / "simulate").string(), log) == 0 &&
          habctl("train " + common + " --out " + (out / "train").string(), log) == 0 &&
          habctl("eval " + common + " --episodes 3 --checkpoint " +
                     (out / "train" / "final.sack").string() + " --out " + (out / "eval").string(),
                 log) == 0 &&
          habctl("windgen " + common + " --out " + (out / "windgen").string(), log) == 0;
  }
  if (!ran) {
    report(false, "determinism", "a habctl run failed, see " + log.string(), timer.seconds());
    return;
  }
  // Everything except manifests, which carry wall-clock timestamps and paths.
  std::size_t compared = 0;
  std::vector<std::string> differing;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
    const fs::path relative = fs::relative(entry.path(), dir / "a");
    ++compared;
    if (slurp(entry.path()) != slurp(dir / "b" / relative)) differing.push_back(relative.string());
  }
  std::string detail = format("%zu output files compared byte for byte", compared);
  if (!differing.empty()) detail += ", differing: " + differing.front();
  report(differing.empty() && compared >= 10, "determinism", detail, timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  fs::path workdir = fs::temp_directory_path() / "hab_acceptance";
  app.add_option("--workdir", workdir, "scratch directory for CLI runs");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);
  report_file.open(workdir / "acceptance_report.txt", std::ios::trunc);

  atmosphere_oracle();
  solver_fidelity();
  float_identity();
  reward_shape();
  gradient_checks();
  learning_criteria(workdir);
  determinism(workdir);

  std::printf("%d of 9 criteria failed\n", failures);
  report_file << failures << " of 9 criteria failed\n";
  return failures == 0 ? 0 : 1;
}
