#include "uavcover/energy.hpp"

#include <algorithm>
#include <string>

#include "uavcover/errors.hpp"

namespace uavcover {

void validate(const EnergyParams& params) {
  if (params.hover_power < 0.0 || params.fly_power < 0.0 ||
      params.surveil_power_max < 0.0) {
    throw ConfigError("energy powers must be non-negative");
  }
  if (params.fly_power < params.hover_power) {
    throw ConfigError("fly_power must be at least hover_power");
  }
  if (!(params.step_minutes > 0.0)) {
    throw ConfigError("step_minutes must be positive");
  }
  const bool any_symbolic = params.delta.has_value() ||
                            params.zeta.has_value() ||
                            params.altitude.has_value() ||
                            params.lift_power.has_value();
  if (any_symbolic && !params.symbolic()) {
    throw ConfigError(
        "symbolic energy model needs delta, zeta, altitude, and lift_power "
        "together");
  }
}

double base_energy(bool moved, const EnergyParams& params) {
  if (params.symbolic()) {
    return (*params.delta + *params.zeta * *params.altitude) *
               params.step_minutes +
           *params.lift_power * params.step_minutes;
  }
  return (moved ? params.fly_power : params.hover_power) * params.step_minutes;
}

double surveillance_energy(double radius, double r_max,
                           const EnergyParams& params) {
  if (!(radius > 0.0) || radius > r_max) {
    throw InvalidRadius("surveillance radius " + std::to_string(radius) +
                        " outside (0, " + std::to_string(r_max) + "]");
  }
  return params.surveil_power_max * (radius / r_max) * params.step_minutes;
}

EnergyLedger drain(EnergyLedger ledger, double e_b, double e_c) {
  ledger.e_b = e_b;
  ledger.e_c = e_c;
  ledger.battery_remaining =
      std::max(0.0, ledger.battery_remaining - e_b - e_c);
  return ledger;
}

}  // namespace uavcover
