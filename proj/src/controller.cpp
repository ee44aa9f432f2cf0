#include "hab/controller.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hab/errors.hpp"
#include "hab/resource_solver.hpp"

namespace hab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double lerp_unit(double unit, double lo, double hi) { return lo + 0.5 * (unit + 1.0) * (hi - lo); }
double unlerp_unit(double value, double lo, double hi) {
  return 2.0 * (value - lo) / (hi - lo) - 1.0;
}

Decision float_decision(const BalloonState& state, const AtmosphereSample& atm,
                        const PhysicsConstants& constants) {
  Decision decision;
  try {
    const resources::FloatAdjustment trim = resources::float_adjustment(state, atm, constants);
    if (const auto* vent = std::get_if<resources::VentTo>(&trim)) {
      decision.action = action::Float{std::max(0.0, state.n - vent->mols), 0.0};
    } else {
      const double target = std::get<resources::BallastTo>(trim).sand;
      decision.action = action::Float{0.0, std::max(0.0, state.m_s - target)};
    }
  } catch (const InsufficientSand& e) {
    decision.action = action::Float{0.0, state.m_s};
    decision.shortfall = Shortfall::kSand;
    decision.note = std::string("float clamped: ") + e.what();
  } catch (const InsufficientHelium& e) {
    decision.action = action::Float{};
    decision.shortfall = Shortfall::kHelium;
    decision.note = std::string("float impossible: ") + e.what();
  }
  return decision;
}

}  // namespace

void CommandTriple::validate() const {
  if (!(altitude >= kMinAltitude && altitude <= kMaxAltitude)) {
    throw ConfigError("desired altitude " + std::to_string(altitude) +
                      " m outside [14000, 21000] m");
  }
  if (!(time_factor >= kMinTimeFactor && time_factor <= kMaxTimeFactor)) {
    throw ConfigError("time factor " + std::to_string(time_factor) + " outside [1, 5]");
  }
  if (!(float_flag >= -1.0 && float_flag <= 1.0)) {
    throw ConfigError("float flag " + std::to_string(float_flag) + " outside [-1, 1]");
  }
}

CommandTriple CommandTriple::from_unit(const std::array<double, 3>& unit) {
  return {lerp_unit(unit[0], kMinAltitude, kMaxAltitude),
          lerp_unit(unit[1], kMinTimeFactor, kMaxTimeFactor), unit[2]};
}

std::array<double, 3> CommandTriple::to_unit() const {
  return {unlerp_unit(altitude, kMinAltitude, kMaxAltitude),
          unlerp_unit(time_factor, kMinTimeFactor, kMaxTimeFactor), float_flag};
}

void ControlThresholds::validate() const {
  if (!(min_vent_mols > 0.0) || !(min_ballast_kg > 0.0) || !(stride > 0.0)) {
    throw ConfigError("controller thresholds and stride must be positive");
  }
}

std::string describe(const ControlAction& act) {
  char buffer[64];
  return std::visit(
      Overloaded{
          [&](const action::Float& f) -> std::string {
            if (f.vent_mols > 0.0) {
              std::snprintf(buffer, sizeof buffer, "float(vent %.6g mol)", f.vent_mols);
              return buffer;
            }
            if (f.ballast_kg > 0.0) {
              std::snprintf(buffer, sizeof buffer, "float(ballast %.6g kg)", f.ballast_kg);
              return buffer;
            }
            return "float";
          },
          [](const action::DoNothing&) -> std::string { return "nothing"; },
          [&](const action::Vent& v) -> std::string {
            std::snprintf(buffer, sizeof buffer, "vent %.6g mol", v.mols);
            return buffer;
          },
          [&](const action::Ballast& b) -> std::string {
            std::snprintf(buffer, sizeof buffer, "ballast %.6g kg", b.kg);
            return buffer;
          },
      },
      act);
}

double vented_mols(const ControlAction& act) {
  if (const auto* f = std::get_if<action::Float>(&act)) return f->vent_mols;
  if (const auto* v = std::get_if<action::Vent>(&act)) return v->mols;
  return 0.0;
}

double dropped_sand(const ControlAction& act) {
  if (const auto* f = std::get_if<action::Float>(&act)) return f->ballast_kg;
  if (const auto* b = std::get_if<action::Ballast>(&act)) return b->kg;
  return 0.0;
}

double desired_ascent_rate(double target_altitude, double time_factor, double altitude,
                           double stride) {
  return (target_altitude - altitude) / (time_factor * stride);
}

Decision decide(const CommandTriple& command, const BalloonState& state,
                const AtmosphereSample& atm, const ControlThresholds& thresholds,
                const PhysicsConstants& constants) {
  if (command.float_flag > 0.0) return float_decision(state, atm, constants);

  const double desired =
      desired_ascent_rate(command.altitude, command.time_factor, state.h, thresholds.stride);

  const bool above = state.h > kMaxAltitude;
  const bool below = state.h < kMinAltitude;
  if ((above && desired >= 0.0) || (below && desired <= 0.0)) {
    Decision decision = float_decision(state, atm, constants);
    decision.desired_rate = desired;
    decision.note = "outside altitude band; floating" +
                    (decision.note.empty() ? std::string() : "; " + decision.note);
    return decision;
  }

  Decision decision;
  decision.desired_rate = desired;
  if (desired > state.h_dot) {
    double drop = 0.0;
    try {
      drop = state.m_s - resources::sand_for_ascent(state, atm, constants, desired);
    } catch (const NegativeTarget& e) {
      drop = state.m_s;
      decision.shortfall = Shortfall::kSand;
      decision.note = std::string("ballast clamped to remaining sand: ") + e.what();
    }
    drop = std::min(drop, state.m_s);
    if (drop >= thresholds.min_ballast_kg) decision.action = action::Ballast{drop};
  } else if (desired < state.h_dot) {
    if (state.n <= thresholds.min_vent_mols) {
      decision.shortfall = Shortfall::kHelium;
      decision.note = "helium exhausted";
      return decision;
    }
    try {
      const double vent =
          std::min(state.n - resources::mols_for_ascent(state, atm, constants, desired), state.n);
      if (vent >= thresholds.min_vent_mols) decision.action = action::Vent{vent};
    } catch (const SolverError& e) {
      decision.note = std::string("vent skipped: ") + e.what();
    }
  }
  return decision;
}

BalloonState apply(const ControlAction& act, BalloonState state) {
  state.n = std::max(0.0, state.n - vented_mols(act));
  state.m_s = std::max(0.0, state.m_s - dropped_sand(act));
  return state;
}

}  // namespace hab
