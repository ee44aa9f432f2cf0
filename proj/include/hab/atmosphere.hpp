#pragma once

#include <span>
#include <vector>

#include "hab/constants.hpp"

namespace hab {

/// One constant-lapse-rate layer; T = T0 + (h - h_base) * L inside the layer.
struct AtmosphereLayer {
  double base_altitude;     // geopotential [m]
  double base_temperature;  // [K]
  double lapse_rate;        // [K/m]
  double base_pressure;     // [Pa]
};

struct AtmosphereSample {
  double altitude;     // [m]
  double temperature;  // [K]
  double pressure;     // [Pa]
  double density;      // [kg/m^3]
};

/// Layer description before base pressures are propagated.
struct LayerSpec {
  double base_altitude;
  double base_temperature;
  double lapse_rate;
};

/// Piecewise lapse-rate standard atmosphere, valid on [0, top] m geopotential.
///
/// Base pressures of every layer above the first are derived from the layer
/// below with the barometric formula, so the profile is continuous by
/// construction.
class Atmosphere {
 public:
  /// Top of the supported band [m].
  static constexpr double kTopAltitude = 47000.0;

  /// The 1976 US Standard Atmosphere up to 47 km.
  static Atmosphere standard(const PhysicsConstants& constants = {});

  /// Custom layer table (sorted, first base at 0 m). Throws ConfigError.
  Atmosphere(std::span<const LayerSpec> layers, double sea_level_pressure,
             const PhysicsConstants& constants);

  /// Throws AltitudeOutOfRange outside [0, 47000] m.
  AtmosphereSample sample(double altitude) const;

  std::span<const AtmosphereLayer> layers() const { return layers_; }

  /// Altitude at which the pressure equals `pressure` (inverse of sample()).
  double altitude_at_pressure(double pressure) const;

 private:
  double pressure_in_layer(const AtmosphereLayer& layer, double altitude) const;

  std::vector<AtmosphereLayer> layers_;
  double molar_mass_air_;
  double gas_constant_;
  double gravity_;
};

}  // namespace hab
