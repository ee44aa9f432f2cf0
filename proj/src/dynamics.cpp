#include "hab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hab/errors.hpp"

namespace hab {

double total_mass(const BalloonState& state, const PhysicsConstants& constants) {
  return state.m_p + state.m_s + state.n * constants.molar_mass_helium;
}

double envelope_volume(double mols, double temperature, double pressure, double gas_constant) {
  return mols * gas_constant * temperature / pressure;
}

double drag_area(double volume) {
  using std::numbers::pi;
  return pi * std::pow(3.0 * volume / (4.0 * pi), 2.0 / 3.0);
}

double vertical_acceleration(const BalloonState& state, const AtmosphereSample& atm,
                             const PhysicsConstants& constants) {
  const double volume =
      envelope_volume(state.n, atm.temperature, atm.pressure, constants.gas_constant);
  const double area = drag_area(volume);
  const double mass = total_mass(state, constants);
  const double g = constants.gravity;

  const double buoyancy = atm.density * volume * g;
  const double drag =
      0.5 * atm.density * constants.drag_coefficient * area * std::abs(state.h_dot) * state.h_dot;
  return (buoyancy - drag - mass * g) / mass;
}

namespace {

struct Derivative {
  double dh;
  double dh_dot;
};

Derivative vertical_derivative(BalloonState probe, double h, double h_dot,
                               const Atmosphere& atmosphere, const PhysicsConstants& constants) {
  probe.h = h;
  probe.h_dot = h_dot;
  return {h_dot, vertical_acceleration(probe, atmosphere.sample(h), constants)};
}

}  // namespace

BalloonState step(const BalloonState& state, const WindSample& wind, double dt,
                  const Atmosphere& atmosphere, const PhysicsConstants& constants) {
  if (!(dt > 0.0)) throw ConfigError("integration step must be positive");

  const double h0 = state.h;
  const double v0 = state.h_dot;
  const Derivative k1 = vertical_derivative(state, h0, v0, atmosphere, constants);
  const Derivative k2 = vertical_derivative(state, h0 + 0.5 * dt * k1.dh,
                                            v0 + 0.5 * dt * k1.dh_dot, atmosphere, constants);
  const Derivative k3 = vertical_derivative(state, h0 + 0.5 * dt * k2.dh,
                                            v0 + 0.5 * dt * k2.dh_dot, atmosphere, constants);
  const Derivative k4 =
      vertical_derivative(state, h0 + dt * k3.dh, v0 + dt * k3.dh_dot, atmosphere, constants);

  BalloonState next = state;
  next.h = h0 + dt / 6.0 * (k1.dh + 2.0 * k2.dh + 2.0 * k3.dh + k4.dh);
  next.h_dot = v0 + dt / 6.0 * (k1.dh_dot + 2.0 * k2.dh_dot + 2.0 * k3.dh_dot + k4.dh_dot);
  next.x += wind.v_wx * dt;
  next.y += wind.v_wy * dt;
  next.t += dt;

  if (!std::isfinite(next.h_dot) || std::abs(next.h_dot) > kMaxAscentRate) {
    throw IntegrationDiverged("ascent rate " + std::to_string(next.h_dot) +
                              " m/s exceeds the 50 m/s sanity bound");
  }
  return next;
}

BalloonState advance(const BalloonState& state, const WindSample& wind, double dt,
                     const Atmosphere& atmosphere, const PhysicsConstants& constants) {
  if (!(dt > 0.0)) throw ConfigError("integration step must be positive");

  BalloonState current = state;
  double remaining = dt;
  while (remaining > 0.0) {
    const AtmosphereSample atm = atmosphere.sample(current.h);
    const double volume =
        envelope_volume(current.n, atm.temperature, atm.pressure, constants.gas_constant);
    const double drag_per_speed = atm.density * constants.drag_coefficient * drag_area(volume) /
                                  total_mass(current, constants);
    // Assume the rate may grow to 2x the current magnitude (or 1 m/s) within the step.
    const double stiffness = drag_per_speed * std::max(2.0 * std::abs(current.h_dot), 1.0);
    const int pieces = std::max(1, static_cast<int>(std::ceil(remaining * stiffness / 0.5)));
    const double sub_dt = remaining / pieces;
    current = step(current, wind, sub_dt, atmosphere, constants);
    remaining -= sub_dt;
    if (pieces == 1) break;
  }
  // Advection is exact for constant wind; avoid accumulating sub-step round-off.
  current.x = state.x + wind.v_wx * dt;
  current.y = state.y + wind.v_wy * dt;
  current.t = state.t + dt;
  return current;
}

}  // namespace hab
