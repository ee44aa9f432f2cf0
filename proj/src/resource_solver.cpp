#include "hab/resource_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hab/errors.hpp"

namespace hab::resources {

namespace {

// Bisection down to adjacent doubles; f(lo) < 0 < f(hi) on entry.
template <typename F>
double bisect(F&& f, double lo, double hi) {
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double mols_for_ascent(const BalloonState& state, const AtmosphereSample& atm,
                       const PhysicsConstants& constants, double desired_rate) {
  using std::numbers::pi;
  if (!std::isfinite(desired_rate)) throw NoPositiveRoot("desired ascent rate is not finite");

  const double g = constants.gravity;
  const double rt_over_p = constants.gas_constant * atm.temperature / atm.pressure;
  const double a = g * (atm.density * rt_over_p - constants.molar_mass_helium);
  const double b = 0.5 * atm.density * std::abs(desired_rate) * desired_rate *
                   constants.drag_coefficient * pi * std::pow(3.0 * rt_over_p / (4.0 * pi), 2.0 / 3.0);
  const double weight = (state.m_p + state.m_s) * g;
  if (!(a > 0.0) || !(weight > 0.0)) {
    throw NoPositiveRoot("force balance has no positive helium root (a = " + std::to_string(a) +
                         ", W = " + std::to_string(weight) + ")");
  }

  const auto balance = [&](double n) { return a * n - b * std::cbrt(n * n) - weight; };
  double hi = std::max(state.n, weight / a);
  for (int i = 0; balance(hi) <= 0.0; ++i) {
    if (i > 200) throw NoPositiveRoot("failed to bracket the helium root");
    hi *= 2.0;
  }
  const double n_calc = bisect(balance, 0.0, hi);
  // Round-off at the fixed point (desired rate == settled rate) must not raise.
  if (n_calc > state.n * (1.0 + 1e-9)) {
    throw TargetExceedsCurrent("rate " + std::to_string(desired_rate) + " m/s needs " +
                                   std::to_string(n_calc) + " mol but only " +
                                   std::to_string(state.n) + " mol on board",
                               n_calc);
  }
  return std::min(n_calc, state.n);
}

double sand_for_ascent(const BalloonState& state, const AtmosphereSample& atm,
                       const PhysicsConstants& constants, double desired_rate) {
  const double volume =
      envelope_volume(state.n, atm.temperature, atm.pressure, constants.gas_constant);
  const double area = drag_area(volume);
  const double drag_mass = atm.density / (2.0 * constants.gravity) * constants.drag_coefficient *
                           area * std::abs(desired_rate) * desired_rate;
  const double target = atm.density * volume - drag_mass - state.m_p -
                        state.n * constants.molar_mass_helium;
  if (target < 0.0) {
    throw NegativeTarget("rate " + std::to_string(desired_rate) +
                             " m/s is unreachable even with all sand dropped",
                         target);
  }
  return target;
}

FloatAdjustment float_adjustment(const BalloonState& state, const AtmosphereSample& atm,
                                 const PhysicsConstants& constants) {
  const double volume =
      envelope_volume(state.n, atm.temperature, atm.pressure, constants.gas_constant);
  const double lift_mass = atm.density * volume;
  const double mass = total_mass(state, constants);

  if (lift_mass > mass) {
    const double displaced_molar_mass =
        atm.density * constants.gas_constant * atm.temperature / atm.pressure;
    const double n_calc =
        (state.m_s + state.m_p) / (displaced_molar_mass - constants.molar_mass_helium);
    // lift > mass already implies n_calc < n; the tolerance only absorbs round-off.
    if (!(n_calc > 0.0) || n_calc > state.n * (1.0 + 1e-9)) {
      throw InsufficientHelium("float trim needs " + std::to_string(n_calc) + " mol, have " +
                               std::to_string(state.n));
    }
    return VentTo{std::min(n_calc, state.n)};
  }
  const double sand = lift_mass - state.m_p - state.n * constants.molar_mass_helium;
  if (sand < 0.0) {
    throw InsufficientSand("float trim needs " + std::to_string(state.m_s - sand) +
                           " kg of sand, have " + std::to_string(state.m_s));
  }
  return BallastTo{sand};
}

}  // namespace hab::resources
