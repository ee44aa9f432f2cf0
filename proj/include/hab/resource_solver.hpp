#pragma once

#include <variant>

#include "hab/atmosphere.hpp"
#include "hab/constants.hpp"
#include "hab/dynamics.hpp"

namespace hab {

/// Steady-state inversions of the vertical force balance.
///
/// All three solvers assume the balloon settles at its terminal velocity
/// before the next decision, i.e. the vertical acceleration is zero:
///   rho V g - 1/2 rho c_d A |h_dot| h_dot - m g = 0.
namespace resources {

/// Helium content [mol] whose terminal ascent rate is `desired_rate`.
///
/// With u = n^(1/3) the balance becomes a u^3 - b u^2 - W = 0 where
///   a = g (rho R T / P - M_h),  b = 1/2 rho |r| r c_d pi (3RT / 4 pi P)^(2/3),
///   W = (m_p + m_s) g.
/// For a > 0 and W > 0 it has exactly one positive root (b of either sign),
/// found by bracketed bisection. The drag area is that of the vented envelope.
///
/// Throws NoPositiveRoot when a <= 0 or W <= 0, TargetExceedsCurrent when the
/// root exceeds the current helium (venting cannot add gas).
double mols_for_ascent(const BalloonState& state, const AtmosphereSample& atm,
                       const PhysicsConstants& constants, double desired_rate);

/// Total sand [kg] whose terminal ascent rate is `desired_rate`, with the
/// current helium content:
///   m_s = rho V - rho / (2g) c_d A |r| r - m_p - n M_h.
/// Throws NegativeTarget when the target is below zero.
double sand_for_ascent(const BalloonState& state, const AtmosphereSample& atm,
                       const PhysicsConstants& constants, double desired_rate);

struct VentTo {
  double mols;  // helium remaining after venting
};

struct BallastTo {
  double sand;  // sand remaining after ballasting
};

using FloatAdjustment = std::variant<VentTo, BallastTo>;

/// Trim to neutral buoyancy (rho V = m). Vents when buoyancy exceeds weight,
/// otherwise ballasts. Throws InsufficientSand / InsufficientHelium when the
/// trim needs more than is on board.
FloatAdjustment float_adjustment(const BalloonState& state, const AtmosphereSample& atm,
                                 const PhysicsConstants& constants);

}  // namespace resources
}  // namespace hab
