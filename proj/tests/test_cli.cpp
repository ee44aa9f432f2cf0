#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hab/cli.hpp"
#include "hab/errors.hpp"
#include "hab/wind_field.hpp"

using namespace hab;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "hab_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int habctl(const std::string& args) {
  const std::string command = std::string(HABCTL_PATH) + " " + args + " > " +
                              (work_dir() / "last.log").string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path small_config() {
  const fs::path path = work_dir() / "small.json";
  std::ofstream(path) << R"({"wind": {"seed": 2, "half_width_deg": 1.2, "days": 4},
  "sac": {"hidden": [16, 16], "batch_size": 16, "warmup_strides": 50, "buffer_capacity": 1000},
  "train": {"episodes": 2, "checkpoint_every": 1}})";
  return path;
}

std::vector<cli::ScriptStep> parse(const std::string& text) {
  std::istringstream in(text);
  return cli::parse_script(in);
}

}  // namespace

TEST_CASE("script grammar") {
  const auto steps = parse(
      "# comment\n"
      "cmd 17000 2 -1\n"
      "\n"
      "act 0.5 -1 1\n"
      "vent 1.5\n"
      "ballast 0.01   # trailing comment\n"
      "float\n"
      "wait\n"
      "wait 3\n");
  REQUIRE(steps.size() == 9);
  const auto& command = std::get<cli::script::Command>(steps[0]).triple;
  CHECK(command.altitude == 17000.0);
  CHECK(command.time_factor == 2.0);
  CHECK(command.float_flag == -1.0);
  CHECK(std::get<cli::script::PolicyAction>(steps[1]).unit == std::array<double, 3>{0.5, -1.0, 1.0});
  CHECK(std::get<action::Vent>(std::get<cli::script::Raw>(steps[2]).action).mols == 1.5);
  CHECK(std::get<action::Ballast>(std::get<cli::script::Raw>(steps[3]).action).kg == 0.01);
  CHECK(std::holds_alternative<cli::script::Float>(steps[4]));
  for (std::size_t i = 5; i < 9; ++i) {
    CHECK(std::holds_alternative<action::DoNothing>(std::get<cli::script::Raw>(steps[i]).action));
  }
}

TEST_CASE("script errors name the line") {
  CHECK_THROWS_WITH_AS(parse("wait\nclimb 3\n"), doctest::Contains("line 2"), FormatError);
  CHECK_THROWS_WITH_AS(parse("cmd 17000 2\n"), doctest::Contains("line 1"), FormatError);
  CHECK_THROWS_WITH_AS(parse("wait\n\ncmd 30000 2 -1\n"), doctest::Contains("line 3"), FormatError);
  CHECK_THROWS_AS(parse("act 1.5 0 0\n"), FormatError);
  CHECK_THROWS_AS(parse("vent -1\n"), FormatError);
  CHECK_THROWS_AS(parse("ballast 0\n"), FormatError);
  CHECK_THROWS_AS(parse("vent abc\n"), FormatError);
  CHECK_THROWS_AS(parse("float now\n"), FormatError);
  CHECK_THROWS_AS(cli::load_script(work_dir() / "no_such_script.txt"), FormatError);
}

TEST_CASE("sha256") {
  CHECK(cli::sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(cli::sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("exit codes") {
  const fs::path dir = work_dir();
  CHECK(habctl("--help") == 0);
  CHECK(habctl("--version") == 0);
  CHECK(habctl("") == 2);
  CHECK(habctl("fly") == 2);
  CHECK(habctl("simulate") == 2);

  const fs::path bad_config = dir / "bad.json";
  std::ofstream(bad_config) << R"({"sac": {"bogus": 1}})";
  CHECK(habctl("simulate --config " + bad_config.string() + " --out " + (dir / "x").string()) == 2);
  CHECK(habctl("simulate --regime calm --out " + (dir / "x").string()) == 2);

  const fs::path bad_script = dir / "bad_script.txt";
  std::ofstream(bad_script) << "wait\njump\n";
  CHECK(habctl("simulate --config " + small_config().string() + " --script " +
               bad_script.string() + " --out " + (dir / "x").string()) == 3);
  CHECK(habctl("windconvert --csv " + std::string(HAB_FIXTURES) + "/wind_ragged.csv --out " +
               (dir / "y").string()) == 3);
  CHECK(habctl("eval --checkpoint " + (dir / "missing.sack").string() + " --out " +
               (dir / "z").string()) == 3);
}

TEST_CASE("windconvert writes a grid that reloads identically") {
  const fs::path out = work_dir() / "converted";
  fs::remove_all(out);
  REQUIRE(habctl("windconvert --csv " + std::string(HAB_FIXTURES) + "/wind_small.csv --out " +
                 out.string()) == 0);
  CHECK(WindGrid::load(out / "wind.wndg") ==
        WindGrid::from_csv(fs::path(HAB_FIXTURES) / "wind_small.csv"));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("windgen matches the library generator") {
  const fs::path out = work_dir() / "windgen";
  fs::remove_all(out);
  REQUIRE(habctl("windgen --config " + small_config().string() + " --regime uniform --seed 9 --out " +
                 out.string()) == 0);
  SynthParams p;
  p.regime = WindRegime::kUniform;
  p.half_width_deg = 1.2;
  p.days = 4.0;
  CHECK(WindGrid::load(out / "wind.wndg") == synth(9, p));
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["max_direction_spread_deg"].get<double>() <= 20.0);
}

TEST_CASE("simulate output is byte-identical across runs") {
  const fs::path dir = work_dir();
  const fs::path script = dir / "flight.txt";
  std::ofstream(script) << "cmd 18000 2 -1\nwait 2\nfloat\nact -0.5 0 -1\nvent 0.5\n";
  for (const char* name : {"sim_a", "sim_b"}) {
    fs::remove_all(dir / name);
    REQUIRE(habctl("simulate --config " + small_config().string() + " --seed 4 --script " +
                   script.string() + " --strides 8 --out " + (dir / name).string()) == 0);
  }
  for (const char* file : {"observations.csv", "trajectory.csv", "summary.json", "config.json"}) {
    CHECK(slurp(dir / "sim_a" / file) == slurp(dir / "sim_b" / file));
  }
  std::istringstream obs(slurp(dir / "sim_a" / "observations.csv"));
  std::string header, line;
  std::getline(obs, header);
  CHECK(header.rfind("step,reward,terminated,truncated,o0,", 0) == 0);
  CHECK(header.substr(header.size() - 4) == ",o70");
  int rows = 0;
  while (std::getline(obs, line)) ++rows;
  CHECK(rows == 9);

  const auto manifest = nlohmann::json::parse(slurp(dir / "sim_a" / "manifest.json"));
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["seed"] == 4);
  CHECK(manifest["config_sha256"] == cli::sha256_hex(slurp(dir / "sim_a" / "config.json")));
  CHECK(manifest["source_config_sha256"] == cli::sha256_hex(slurp(small_config())));
}

TEST_CASE("train, resume and eval") {
  const fs::path dir = work_dir();
  const fs::path run = dir / "train_run";
  fs::remove_all(run);
  REQUIRE(habctl("train --config " + small_config().string() + " --seed 3 --out " + run.string()) == 0);
  CHECK(fs::exists(run / "checkpoints" / "episode_000001.sack"));
  CHECK(fs::exists(run / "final.sack"));
  REQUIRE(habctl("train --episodes 1 --resume " + (run / "final.sack").string() + " --config " +
                 small_config().string() + " --seed 3 --out " + run.string()) == 0);
  std::istringstream metrics(slurp(run / "metrics.csv"));
  std::string line, last;
  int rows = -1;
  while (std::getline(metrics, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == 3);
  CHECK(last.rfind("2,", 0) == 0);

  const fs::path eval = dir / "eval_run";
  fs::remove_all(eval);
  REQUIRE(habctl("eval --checkpoint " + (run / "final.sack").string() + " --episodes 2 --out " +
                 eval.string()) == 0);
  const auto report = nlohmann::json::parse(slurp(eval / "report.json"));
  CHECK(report["episodes"] == 2);
  CHECK(fs::exists(eval / "eval_episodes.csv"));
  CHECK(fs::exists(eval / "trajectories" / "episode_0001.csv"));
  CHECK(fs::exists(eval / "birdseye" / "episode_0000.csv"));
  CHECK(fs::exists(eval / "target_circle.csv"));
  CHECK(habctl("eval --checkpoint " + (run / "final.sack").string() + " --episodes 0 --out " +
               (dir / "eval_zero").string()) == 2);
}

TEST_CASE("simulate reproduces the golden reset and action-script files") {
  const fs::path golden = fs::path(HAB_FIXTURES).parent_path() / "golden";
  const fs::path out = work_dir() / "golden";
  fs::remove_all(out);
  REQUIRE(habctl("simulate --seed 42 --script " + (golden / "actions.txt").string() +
                 " --strides 10 --out " + out.string()) == 0);
  for (const char* file : {"observations.csv", "trajectory.csv"}) {
    std::istringstream expected(slurp(golden / file)), actual(slurp(out / file));
    std::string want, got;
    int rows = 0;
    while (std::getline(expected, want)) {
      REQUIRE(std::getline(actual, got));
      std::istringstream a(want), b(got);
      std::string x, y;
      while (std::getline(a, x, ',')) {
        REQUIRE(std::getline(b, y, ','));
        char* end = nullptr;
        const double vx = std::strtod(x.c_str(), &end);
        if (end == x.c_str() || *end != '\0') {
          CHECK(x == y);
        } else {
          CHECK(std::stod(y) == doctest::Approx(vx).epsilon(1e-9).scale(1.0));
        }
      }
      ++rows;
    }
    CHECK_FALSE(std::getline(actual, got));
    // Header, the reset row for observations, then ten strides.
    CHECK(rows == (std::string(file) == "observations.csv" ? 12 : 11));
  }
}
