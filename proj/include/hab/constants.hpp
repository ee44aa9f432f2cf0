#pragma once

namespace hab {

/// Physical constants shared by the atmosphere, dynamics and resource solver.
/// Defaults are the US Standard Atmosphere 1976 values plus helium.
struct PhysicsConstants {
  double drag_coefficient = 0.25;      // c_d [-]
  double molar_mass_air = 0.0289644;   // M_a [kg/mol]
  double molar_mass_helium = 0.0040026;  // M_h [kg/mol]
  double gas_constant = 8.31446;       // R [J/(mol K)]
  double gravity = 9.80665;            // g [m/s^2]

  /// Throws ConfigError when any constant is non-positive or c_d is outside [0.1, 1].
  void validate() const;
};

}  // namespace hab
