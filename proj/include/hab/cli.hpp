#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "hab/controller.hpp"

namespace hab::cli {

/// Exit codes of habctl.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFormat = 3;
inline constexpr int kExitRuntime = 4;

/// One stride of a flight script.
namespace script {
struct Command {
  CommandTriple triple;
};
struct PolicyAction {
  std::array<double, 3> unit;  // policy space, each in [-1, 1]
};
struct Raw {
  ControlAction action;  // vent, ballast or do-nothing
};
struct Float {};
}  // namespace script

using ScriptStep = std::variant<script::Command, script::PolicyAction, script::Raw, script::Float>;

/// Parse a flight script; errors name the offending line. Grammar in docs/formats.md.
std::vector<ScriptStep> parse_script(std::istream& in);
std::vector<ScriptStep> load_script(const std::filesystem::path& path);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Entry point; returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace hab::cli
