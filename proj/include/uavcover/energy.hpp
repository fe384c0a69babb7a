#pragma once

#include <optional>

namespace uavcover {

/// Power model of one UAV. The two-mode hover/fly table is the default;
/// when delta, zeta, altitude, and lift_power are all set, the symbolic
/// form (delta + zeta*altitude)*t + lift_power*t replaces the table.
struct EnergyParams {
  double hover_power = 128.89;     // watts while holding position
  double fly_power = 170.32;       // watts while moving
  double surveil_power_max = 5.0;  // watts at the largest coverage radius
  double step_minutes = 1.0;

  std::optional<double> delta;       // watts, minimum power to stay airborne
  std::optional<double> zeta;        // watts per meter of altitude
  std::optional<double> altitude;    // meters
  std::optional<double> lift_power;  // watts spent on lift

  bool symbolic() const {
    return delta && zeta && altitude && lift_power;
  }

  bool operator==(const EnergyParams&) const = default;
};

void validate(const EnergyParams& params);  // throws ConfigError

/// Battery bookkeeping for one UAV. All values in watt-minutes; with
/// 1-minute steps the per-step draws equal the model's watt figures.
struct EnergyLedger {
  double e_b = 0.0;                  // basic (aviation) draw last step
  double e_c = 0.0;                  // surveillance draw last step
  double battery_remaining = 10000.0;

  bool operator==(const EnergyLedger&) const = default;
};

/// Basic energy of one step: hover or fly rate times step duration.
double base_energy(bool moved, const EnergyParams& params);

/// Surveillance energy of one step, linear in coverage radius and maxed
/// at surveil_power_max when radius == r_max. Throws InvalidRadius when
/// radius is non-positive or exceeds r_max.
double surveillance_energy(double radius, double r_max,
                           const EnergyParams& params);

/// Applies one step's draws; battery clamps at zero and stays there.
EnergyLedger drain(EnergyLedger ledger, double e_b, double e_c);

}  // namespace uavcover
