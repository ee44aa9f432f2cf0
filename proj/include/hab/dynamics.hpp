#pragma once

#include "hab/atmosphere.hpp"
#include "hab/constants.hpp"

namespace hab {

/// Kinematic and resource state of the balloon.
///
/// Horizontal position is relative to the station-keeping target on a local
/// tangent plane. Horizontal velocity is not stored: the balloon moves with
/// the wind.
struct BalloonState {
  double x = 0.0;      // east of target [m]
  double y = 0.0;      // north of target [m]
  double h = 0.0;      // altitude [m]
  double h_dot = 0.0;  // ascent rate [m/s]
  double m_p = 0.0;    // payload + envelope [kg]
  double m_s = 0.0;    // sand ballast [kg]
  double n = 0.0;      // helium [mol]
  double t = 0.0;      // episode time [s]
};

struct WindSample {
  double v_wx = 0.0;  // eastward [m/s]
  double v_wy = 0.0;  // northward [m/s]
};

/// m = m_p + m_s + n * M_h
double total_mass(const BalloonState& state, const PhysicsConstants& constants);

/// Ideal gas volume V = nRT/P with internal temperature and pressure equal to ambient.
double envelope_volume(double mols, double temperature, double pressure,
                       double gas_constant = PhysicsConstants{}.gas_constant);

/// Cross-section of the equivalent sphere, pi * (3V / 4pi)^(2/3).
double drag_area(double volume);

/// Net vertical acceleration (rho V g - 1/2 rho c_d A |h_dot| h_dot - m g) / m.
double vertical_acceleration(const BalloonState& state, const AtmosphereSample& atm,
                             const PhysicsConstants& constants);

/// Largest |h_dot| tolerated before IntegrationDiverged is raised [m/s].
inline constexpr double kMaxAscentRate = 50.0;

/// Advance the state by `dt` seconds.
///
/// (h, h_dot) use classic RK4 with the atmosphere re-sampled at every stage;
/// (x, y) are advected with the constant wind over the step. Masses are
/// untouched.
BalloonState step(const BalloonState& state, const WindSample& wind, double dt,
                  const Atmosphere& atmosphere, const PhysicsConstants& constants);

/// Advance by `dt` using as many equal RK4 sub-steps as the local drag
/// stiffness requires (|lambda| * h_sub <= 0.5, lambda = d(accel)/d(h_dot)).
/// Wind is held constant over `dt`.
BalloonState advance(const BalloonState& state, const WindSample& wind, double dt,
                     const Atmosphere& atmosphere, const PhysicsConstants& constants);

}  // namespace hab
