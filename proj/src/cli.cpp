#include "hab/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "hab/checkpoint.hpp"
#include "hab/config.hpp"
#include "hab/environment.hpp"
#include "hab/errors.hpp"
#include "hab/trainer.hpp"

#ifndef HAB_VERSION
#define HAB_VERSION "dev"
#endif

namespace hab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double parse_number(const std::string& token, std::size_t line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || !std::isfinite(value)) {
    throw FormatError("script line " + std::to_string(line) + ": '" + token +
                      "' is not a finite number");
  }
  return value;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Error("cannot write " + path.string());
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_g(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

std::string wind_descriptor(const WindSourceConfig& wind) {
  if (wind.kind == WindSourceConfig::Kind::kFile) return "file:" + wind.path.string();
  return "synth:" + to_string(wind.synth.regime) + ":seed=" + std::to_string(wind.seed);
}

/// Options shared by the run-producing subcommands.
struct Common {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out;
  std::string regime;
};

void add_common(CLI::App* cmd, Common& c, bool with_regime) {
  cmd->add_option("--config", c.config_path, "JSON run config (defaults apply to omitted keys)");
  cmd->add_option("--seed", c.seed, "run seed")->capture_default_str();
  cmd->add_option("--out", c.out, "output run directory")->required();
  if (with_regime) {
    cmd->add_option("--regime", c.regime, "synthetic wind regime: diverse, uniform or strong");
  }
}

RunConfig effective_config(const Common& c, const json* fallback = nullptr) {
  RunConfig config;
  if (!c.config_path.empty()) {
    config = load_config(c.config_path);
  } else if (fallback) {
    config = config_from_json(*fallback);
  }
  if (!c.regime.empty()) {
    config.environment.wind.synth.regime = parse_regime(c.regime);
    config.environment.wind.kind = WindSourceConfig::Kind::kSynth;
  }
  config.validate();
  return config;
}

/// Run directory bookkeeping: stores the effective config and one manifest.
class RunDirectory {
 public:
  RunDirectory(const std::string& command, const Common& c, const RunConfig& config)
      : root_(c.out) {
    fs::create_directories(root_);
    const std::string config_text = to_json(config).dump(2) + "\n";
    write_text(root_ / "config.json", config_text);
    manifest_ = json{{"command", command},
                     {"code_version", HAB_VERSION},
                     {"config_file", "config.json"},
                     {"config_sha256", sha256_hex(config_text)},
                     {"seed", c.seed},
                     {"wind_source", wind_descriptor(config.environment.wind)},
                     {"output_dir", fs::absolute(root_).lexically_normal().string()},
                     {"started_utc", utc_now()}};
    if (!c.config_path.empty()) {
      manifest_["source_config_path"] = c.config_path;
      manifest_["source_config_sha256"] = sha256_hex(slurp(c.config_path));
    }
    save();
  }

  const fs::path& root() const { return root_; }
  json& manifest() { return manifest_; }

  void finish() {
    manifest_["finished_utc"] = utc_now();
    save();
  }

 private:
  void save() { write_text(root_ / "manifest.json", manifest_.dump(2) + "\n"); }

  fs::path root_;
  json manifest_;
};

void write_observation_row(std::ostream& out, std::size_t step, const StepResult& result) {
  char buf[64];
  out << step;
  std::snprintf(buf, sizeof buf, ",%.17g,%d,%d", result.reward, result.terminated ? 1 : 0,
                result.truncated ? 1 : 0);
  out << buf;
  for (double v : result.observation) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out << buf;
  }
  out << '\n';
}

int cmd_simulate(const Common& c, const std::string& script_path, std::optional<std::size_t> strides) {
  const RunConfig config = effective_config(c);
  const std::vector<ScriptStep> steps =
      script_path.empty() ? std::vector<ScriptStep>{} : load_script(script_path);
  RunDirectory run("simulate", c, config);
  if (!script_path.empty()) {
    fs::copy_file(script_path, run.root() / "script.txt", fs::copy_options::overwrite_existing);
  }

  Environment env(config.environment);
  const std::size_t total = strides.value_or(config.environment.episode.strides());
  std::ofstream observations(run.root() / "observations.csv", std::ios::trunc);
  observations << "step,reward,terminated,truncated";
  for (std::size_t i = 0; i < kObservationSize; ++i) observations << ",o" << i;
  observations << '\n';

  StepResult first;
  first.observation = env.reset(c.seed);
  write_observation_row(observations, 0, first);

  double h_min = env.state().h, h_max = env.state().h;
  for (std::size_t k = 0; k < total && !env.done(); ++k) {
    const ScriptStep step = k < steps.size() ? steps[k] : ScriptStep{script::Raw{action::DoNothing{}}};
    StepResult result;
    if (const auto* cmd = std::get_if<script::Command>(&step)) {
      result = env.step(cmd->triple);
    } else if (const auto* act = std::get_if<script::PolicyAction>(&step)) {
      result = env.step(CommandTriple::from_unit(act->unit));
    } else if (const auto* raw = std::get_if<script::Raw>(&step)) {
      result = env.step_action(raw->action);
    } else {
      CommandTriple hold;
      hold.float_flag = 1.0;
      result = env.step(hold);
    }
    write_observation_row(observations, k + 1, result);
    h_min = std::min(h_min, env.state().h);
    h_max = std::max(h_max, env.state().h);
  }
  if (!observations) throw Error("failed writing observations.csv");
  observations.close();
  write_trajectory_csv(env.trajectory(), run.root() / "trajectory.csv");

  const EpisodeInfo& info = env.info();
  const json summary{{"strides", info.strides},
                     {"scheduled_strides", info.scheduled_strides},
                     {"termination", to_string(info.termination)},
                     {"tw50", info.tw50()},
                     {"cumulative_reward", info.cumulative_reward},
                     {"helium_initial_mol", info.initial_mols},
                     {"helium_vented_mol", info.vented_mols},
                     {"helium_final_mol", env.state().n},
                     {"sand_initial_kg", info.initial_sand},
                     {"sand_dropped_kg", info.dropped_kg},
                     {"sand_final_kg", env.state().m_s},
                     {"altitude_min_m", h_min},
                     {"altitude_max_m", h_max},
                     {"clamped_wind_queries", info.clamped_wind_queries},
                     {"last_note", info.last_note}};
  write_text(run.root() / "summary.json", summary.dump(2) + "\n");
  run.finish();
  std::cout << "simulated " << info.strides << " strides, termination " << to_string(info.termination)
            << ", altitude " << format_g(h_min) << ".." << format_g(h_max) << " m, vented "
            << format_g(info.vented_mols) << " mol, dropped " << format_g(info.dropped_kg)
            << " kg\n";
  return kExitOk;
}

int cmd_train(const Common& c, std::optional<std::size_t> episodes, const std::string& resume_path) {
  std::optional<Checkpoint> resume;
  if (!resume_path.empty()) resume = read_checkpoint(resume_path);
  RunConfig config = effective_config(c, resume ? &resume->config : nullptr);
  if (episodes) config.train.episodes = *episodes;
  RunDirectory run("train", c, config);
  if (resume) run.manifest()["resumed_from"] = resume_path;

  Trainer trainer(config, c.seed, make_wind_grid(config.environment.wind));
  if (resume) trainer.resume(*resume);

  const fs::path metrics_path = run.root() / "metrics.csv";
  const bool append = resume && fs::exists(metrics_path);
  std::ofstream metrics(metrics_path, append ? std::ios::app : std::ios::trunc);
  if (!append) write_metrics_header(metrics);
  const fs::path checkpoints = run.root() / "checkpoints";
  fs::create_directories(checkpoints);

  for (std::size_t e = 0; e < config.train.episodes; ++e) {
    const EpisodeMetrics m = trainer.run_episode();
    write_metrics_row(metrics, m);
    metrics.flush();
    const std::size_t done = trainer.counters().episodes;
    if (config.train.checkpoint_every > 0 && done % config.train.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "episode_%06zu.sack", done);
      write_checkpoint(trainer.checkpoint(), checkpoints / name);
    }
    if (done % 10 == 0 || e + 1 == config.train.episodes) {
      std::cerr << "episode " << done << " tw50 " << format_g(m.tw50) << " reward "
                << format_g(m.cumulative_reward) << " " << to_string(m.termination) << " alpha "
                << format_g(m.alpha) << "\n";
    }
  }
  if (!metrics) throw Error("failed writing metrics.csv");
  write_checkpoint(trainer.checkpoint(), run.root() / "final.sack");
  run.manifest()["episodes_completed"] = trainer.counters().episodes;
  run.finish();
  return kExitOk;
}

int cmd_eval(const Common& c, const std::string& checkpoint_path, std::size_t episodes,
             std::size_t threads) {
  if (episodes == 0) throw ConfigError("--episodes must be at least 1");
  const Checkpoint checkpoint = read_checkpoint(checkpoint_path);
  const RunConfig config = effective_config(c, &checkpoint.config);
  RunDirectory run("eval", c, config);
  run.manifest()["checkpoint"] = checkpoint_path;

  sac::SacAgent agent(kObservationSize, kActionSize, config.sac, 0);
  restore(checkpoint, agent);
  const EvalReport report = evaluate(agent, config.environment,
                                     make_wind_grid(config.environment.wind), c.seed, episodes,
                                     threads);

  const fs::path trajectories = run.root() / "trajectories";
  const fs::path birdseye = run.root() / "birdseye";
  fs::create_directories(trajectories);
  fs::create_directories(birdseye);
  std::ofstream table(run.root() / "eval_episodes.csv", std::ios::trunc);
  table << "episode,seed,tw50,cumulative_reward,termination_reason,strides,sand_used_kg,"
           "helium_used_mol\n";
  for (const EvalEpisode& e : report.episodes) {
    table << e.index << ',' << e.seed << ',' << format_g(e.info.tw50()) << ','
          << format_g(e.info.cumulative_reward) << ',' << to_string(e.info.termination) << ','
          << e.info.strides << ',' << format_g(e.info.dropped_kg) << ','
          << format_g(e.info.vented_mols) << '\n';
    char name[64];
    std::snprintf(name, sizeof name, "episode_%04zu.csv", e.index);
    write_trajectory_csv(e.trajectory, trajectories / name);
    std::ofstream trace(birdseye / name, std::ios::trunc);
    trace << "t_s,x_km,y_km\n";
    for (const StrideRecord& r : e.trajectory) {
      trace << format_g(r.t) << ',' << format_g(r.x / 1000.0) << ',' << format_g(r.y / 1000.0)
            << '\n';
    }
  }
  std::ofstream circle(run.root() / "target_circle.csv", std::ios::trunc);
  circle << "x_km,y_km\n";
  const double radius = config.environment.reward.radius_km;
  for (int i = 0; i <= 360; ++i) {
    const double angle = i * std::numbers::pi / 180.0;
    circle << format_g(radius * std::cos(angle)) << ',' << format_g(radius * std::sin(angle)) << '\n';
  }

  json report_json{{"episodes", episodes},
                   {"tw50_mean", report.tw50_mean},
                   {"tw50_ci95", report.tw50_ci95},
                   {"reward_mean", report.reward_mean},
                   {"reward_ci95", report.reward_ci95},
                   {"terminations", report.terminations}};
  write_text(run.root() / "report.json", report_json.dump(2) + "\n");
  run.finish();
  std::cout << "tw50 " << format_g(report.tw50_mean) << " +- " << format_g(report.tw50_ci95)
            << ", reward " << format_g(report.reward_mean) << " +- "
            << format_g(report.reward_ci95) << ", terminations";
  for (const auto& [reason, count] : report.terminations) std::cout << ' ' << reason << '=' << count;
  std::cout << '\n';
  return kExitOk;
}

void describe_grid(const WindGrid& grid) {
  std::cout << "grid " << grid.lon().size() << " lon x " << grid.lat().size() << " lat x "
            << grid.pressure().size() << " pressure x " << grid.time().size() << " time\n";
}

int cmd_windgen(const Common& c) {
  RunConfig config = effective_config(c);
  config.environment.wind.kind = WindSourceConfig::Kind::kSynth;
  config.environment.wind.seed = c.seed;
  RunDirectory run("windgen", c, config);
  const WindGrid grid = synth(c.seed, config.environment.wind.synth);
  grid.save(run.root() / "wind.wndg");
  double spread = 0.0;
  for (std::size_t it = 0; it < grid.time().size(); ++it) {
    spread = std::max(spread, max_direction_spread(grid, grid.lon().size() / 2, grid.lat().size() / 2, it));
  }
  spread *= 180.0 / std::numbers::pi;
  run.manifest()["max_direction_spread_deg"] = spread;
  run.finish();
  describe_grid(grid);
  std::cout << "max direction spread across pressure at the centre column " << format_g(spread)
            << " deg\n";
  return kExitOk;
}

int cmd_windconvert(const Common& c, const std::string& csv_path) {
  const RunConfig config = effective_config(c);
  const WindGrid grid = WindGrid::from_csv(csv_path);
  RunDirectory run("windconvert", c, config);
  run.manifest()["source_csv"] = csv_path;
  run.manifest()["source_csv_sha256"] = sha256_hex(slurp(csv_path));
  const fs::path target = run.root() / "wind.wndg";
  grid.save(target);
  if (!(WindGrid::load(target) == grid)) throw Error("converted grid does not reload identically");
  run.finish();
  describe_grid(grid);
  return kExitOk;
}

}  // namespace

std::vector<ScriptStep> parse_script(std::istream& in) {
  std::vector<ScriptStep> steps;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (const auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    std::istringstream words(text);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) tokens.push_back(w);
    if (tokens.empty()) continue;

    const std::string& verb = tokens[0];
    auto expect = [&](std::size_t args) {
      if (tokens.size() != args + 1) {
        throw FormatError("script line " + std::to_string(line) + ": '" + verb + "' takes " +
                          std::to_string(args) + " argument(s), got " +
                          std::to_string(tokens.size() - 1));
      }
    };
    auto number = [&](std::size_t i) { return parse_number(tokens[i], line); };
    try {
      if (verb == "cmd") {
        expect(3);
        CommandTriple triple{number(1), number(2), number(3)};
        triple.validate();
        steps.push_back(script::Command{triple});
      } else if (verb == "act") {
        expect(3);
        std::array<double, 3> unit{number(1), number(2), number(3)};
        for (double u : unit) {
          if (u < -1.0 || u > 1.0) throw ConfigError("policy actions must lie in [-1, 1]");
        }
        steps.push_back(script::PolicyAction{unit});
      } else if (verb == "vent") {
        expect(1);
        const double mols = number(1);
        if (!(mols > 0.0)) throw ConfigError("vent amount must be positive");
        steps.push_back(script::Raw{action::Vent{mols}});
      } else if (verb == "ballast") {
        expect(1);
        const double kg = number(1);
        if (!(kg > 0.0)) throw ConfigError("ballast amount must be positive");
        steps.push_back(script::Raw{action::Ballast{kg}});
      } else if (verb == "float") {
        expect(0);
        steps.push_back(script::Float{});
      } else if (verb == "wait") {
        if (tokens.size() > 2) expect(1);
        double count = tokens.size() == 2 ? number(1) : 1.0;
        if (!(count >= 1.0) || count != std::floor(count) || count > 1e6) {
          throw ConfigError("wait count must be a positive integer");
        }
        for (double i = 0; i < count; ++i) steps.push_back(script::Raw{action::DoNothing{}});
      } else {
        throw FormatError("script line " + std::to_string(line) + ": unknown command '" + verb +
                          "'");
      }
    } catch (const ConfigError& e) {
      throw FormatError("script line " + std::to_string(line) + ": " + e.what());
    }
  }
  return steps;
}

std::vector<ScriptStep> load_script(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open script " + path.string());
  return parse_script(in);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"High-altitude balloon station-keeping: simulate, train, evaluate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", HAB_VERSION);

  Common simulate_opts, train_opts, eval_opts, windgen_opts, convert_opts;
  std::string script_path, resume_path, checkpoint_path, csv_path;
  std::optional<std::size_t> simulate_strides, train_episodes;
  std::size_t eval_episodes = 50;
  std::size_t eval_threads = 1;

  auto* simulate_cmd = app.add_subcommand("simulate", "replay a flight script through controller and physics");
  add_common(simulate_cmd, simulate_opts, true);
  simulate_cmd->add_option("--script", script_path, "flight script (one stride per line)");
  simulate_cmd->add_option("--strides", simulate_strides,
                           "strides to simulate (default: a full episode; the script is padded with waits)");

  auto* train_cmd = app.add_subcommand("train", "train a SAC policy");
  add_common(train_cmd, train_opts, true);
  train_cmd->add_option("--episodes", train_episodes, "episodes to run (overrides train.episodes)");
  train_cmd->add_option("--resume", resume_path, "checkpoint to continue from");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint with the deterministic policy");
  add_common(eval_cmd, eval_opts, true);
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval_cmd->add_option("--episodes", eval_episodes, "evaluation episodes")->capture_default_str();
  eval_cmd->add_option("--threads", eval_threads, "worker threads")->capture_default_str();

  auto* windgen_cmd = app.add_subcommand("windgen", "generate a synthetic wind grid");
  add_common(windgen_cmd, windgen_opts, true);

  auto* convert_cmd = app.add_subcommand("windconvert", "convert a CSV wind extract to a grid file");
  add_common(convert_cmd, convert_opts, false);
  convert_cmd->add_option("--csv", csv_path, "input CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(simulate_opts, script_path, simulate_strides);
    if (*train_cmd) return cmd_train(train_opts, train_episodes, resume_path);
    if (*eval_cmd) return cmd_eval(eval_opts, checkpoint_path, eval_episodes, eval_threads);
    if (*windgen_cmd) return cmd_windgen(windgen_opts);
    if (*convert_cmd) return cmd_windconvert(convert_opts, csv_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace hab::cli
