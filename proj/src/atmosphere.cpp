#include "hab/atmosphere.hpp"

#include <array>
#include <cmath>
#include <string>

#include "hab/errors.hpp"

namespace hab {

void PhysicsConstants::validate() const {
  if (!(molar_mass_air > 0.0) || !(molar_mass_helium > 0.0) || !(gas_constant > 0.0) ||
      !(gravity > 0.0)) {
    throw ConfigError("physics constants must be strictly positive");
  }
  if (!(drag_coefficient >= 0.1 && drag_coefficient <= 1.0)) {
    throw ConfigError("drag coefficient must lie in [0.1, 1.0], got " +
                      std::to_string(drag_coefficient));
  }
}

Atmosphere Atmosphere::standard(const PhysicsConstants& constants) {
  static constexpr std::array<LayerSpec, 4> kUssa1976{{
      {0.0, 288.15, -0.0065},
      {11000.0, 216.65, 0.0},
      {20000.0, 216.65, 0.0010},
      {32000.0, 228.65, 0.0028},
  }};
  return Atmosphere(kUssa1976, 101325.0, constants);
}

Atmosphere::Atmosphere(std::span<const LayerSpec> layers, double sea_level_pressure,
                       const PhysicsConstants& constants)
    : molar_mass_air_(constants.molar_mass_air),
      gas_constant_(constants.gas_constant),
      gravity_(constants.gravity) {
  if (layers.empty() || layers.front().base_altitude != 0.0) {
    throw ConfigError("atmosphere layer table must start at 0 m");
  }
  if (!(sea_level_pressure > 0.0)) throw ConfigError("sea-level pressure must be positive");

  layers_.reserve(layers.size());
  double pressure = sea_level_pressure;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& spec = layers[i];
    if (!(spec.base_temperature > 0.0)) throw ConfigError("layer temperature must be positive");
    if (i > 0) {
      if (!(spec.base_altitude > layers[i - 1].base_altitude)) {
        throw ConfigError("atmosphere layers must be sorted by base altitude");
      }
      const AtmosphereLayer& below = layers_.back();
      const double top_temperature =
          below.base_temperature + (spec.base_altitude - below.base_altitude) * below.lapse_rate;
      if (std::abs(top_temperature - spec.base_temperature) > 1e-9) {
        throw ConfigError("atmosphere layer temperatures are discontinuous at " +
                          std::to_string(spec.base_altitude) + " m");
      }
      pressure = pressure_in_layer(below, spec.base_altitude);
    }
    layers_.push_back({spec.base_altitude, spec.base_temperature, spec.lapse_rate, pressure});
  }
  const AtmosphereLayer& last = layers_.back();
  if (last.base_temperature + (kTopAltitude - last.base_altitude) * last.lapse_rate <= 0.0) {
    throw ConfigError("atmosphere temperature reaches zero below 47 km");
  }
}

double Atmosphere::pressure_in_layer(const AtmosphereLayer& layer, double altitude) const {
  const double dh = altitude - layer.base_altitude;
  const double gm_over_r = gravity_ * molar_mass_air_ / gas_constant_;
  if (layer.lapse_rate == 0.0) {
    return layer.base_pressure * std::exp(-gm_over_r * dh / layer.base_temperature);
  }
  const double temperature = layer.base_temperature + dh * layer.lapse_rate;
  return layer.base_pressure *
         std::pow(layer.base_temperature / temperature, gm_over_r / layer.lapse_rate);
}

AtmosphereSample Atmosphere::sample(double altitude) const {
  if (!(altitude >= 0.0 && altitude <= kTopAltitude)) throw AltitudeOutOfRange(altitude);

  std::size_t index = layers_.size() - 1;
  while (index > 0 && altitude < layers_[index].base_altitude) --index;
  const AtmosphereLayer& layer = layers_[index];

  AtmosphereSample out{};
  out.altitude = altitude;
  out.temperature = layer.base_temperature + (altitude - layer.base_altitude) * layer.lapse_rate;
  out.pressure = pressure_in_layer(layer, altitude);
  out.density = out.pressure * molar_mass_air_ / (gas_constant_ * out.temperature);
  return out;
}

double Atmosphere::altitude_at_pressure(double pressure) const {
  const double top_pressure = sample(kTopAltitude).pressure;
  if (!(pressure <= layers_.front().base_pressure && pressure >= top_pressure)) {
    throw ConfigError("pressure " + std::to_string(pressure) + " Pa outside atmosphere band");
  }
  std::size_t index = layers_.size() - 1;
  while (index > 0 && pressure > layers_[index].base_pressure) --index;
  const AtmosphereLayer& layer = layers_[index];

  const double gm_over_r = gravity_ * molar_mass_air_ / gas_constant_;
  const double ratio = pressure / layer.base_pressure;
  if (layer.lapse_rate == 0.0) {
    return layer.base_altitude - std::log(ratio) * layer.base_temperature / gm_over_r;
  }
  // P/P0 = (T0/T)^(gM/RL)  =>  T = T0 * ratio^(-RL/gM)
  const double temperature =
      layer.base_temperature * std::pow(ratio, -layer.lapse_rate / gm_over_r);
  return layer.base_altitude + (temperature - layer.base_temperature) / layer.lapse_rate;
}

}  // namespace hab
