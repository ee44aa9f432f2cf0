#pragma once

#include <array>
#include <string>
#include <variant>

#include "hab/atmosphere.hpp"
#include "hab/constants.hpp"
#include "hab/dynamics.hpp"

namespace hab {

/// Operating altitude band [m]; also the range of the desired-altitude command.
inline constexpr double kMinAltitude = 14000.0;
inline constexpr double kMaxAltitude = 21000.0;
inline constexpr double kMinTimeFactor = 1.0;
inline constexpr double kMaxTimeFactor = 5.0;

/// Agent command: desired altitude, time factor and float flag.
struct CommandTriple {
  double altitude = 17500.0;  // a0 [m], in [14000, 21000]
  double time_factor = 3.0;   // a1 [-], in [1, 5]
  double float_flag = -1.0;   // a2 [-], in [-1, 1]; float iff > 0

  /// Throws ConfigError when a field leaves its interval.
  void validate() const;

  /// Affine map from the policy's [-1, 1]^3 output.
  static CommandTriple from_unit(const std::array<double, 3>& unit);
  std::array<double, 3> to_unit() const;
};

struct ControlThresholds {
  double min_vent_mols = 0.05;     // n_min
  double min_ballast_kg = 0.01;    // m_s_min
  double stride = 1200.0;          // decision interval [s]

  void validate() const;
};

namespace action {

/// Trim to neutral buoyancy; at most one of the fields is non-zero.
struct Float {
  double vent_mols = 0.0;
  double ballast_kg = 0.0;
};
struct DoNothing {};
struct Vent {
  double mols;
};
struct Ballast {
  double kg;
};

}  // namespace action

using ControlAction = std::variant<action::Float, action::DoNothing, action::Vent, action::Ballast>;

std::string describe(const ControlAction& action);
double vented_mols(const ControlAction& action);
double dropped_sand(const ControlAction& action);

/// Resource the decision wanted but the balloon could not supply.
enum class Shortfall { kNone, kSand, kHelium };

struct Decision {
  ControlAction action = action::DoNothing{};
  Shortfall shortfall = Shortfall::kNone;
  double desired_rate = 0.0;  // h_dot_des; 0 for float commands
  std::string note;           // why a solver result was overridden, if it was
};

/// h_dot_des = (a0 - h_t) / (a1 * stride)
double desired_ascent_rate(double target_altitude, double time_factor, double altitude,
                           double stride);

/// Resolve a command into a physical action.
///
/// Float when a2 > 0. Otherwise ballast when the desired rate exceeds the
/// current one and vent when it is lower, with sub-threshold quantities
/// becoming DoNothing. Outside the operating band any command that does not
/// head back into it is replaced by Float. Solver failures never throw: they
/// become DoNothing (or a clamped ballast) with `note` set.
Decision decide(const CommandTriple& command, const BalloonState& state,
                const AtmosphereSample& atm, const ControlThresholds& thresholds,
                const PhysicsConstants& constants);

/// Remove the vented helium / dropped sand from the state.
BalloonState apply(const ControlAction& action, BalloonState state);

}  // namespace hab
