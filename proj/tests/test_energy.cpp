#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "uavcover/energy.hpp"
#include "uavcover/errors.hpp"

using namespace uavcover;

TEST_CASE("hover and fly table rates") {
  EnergyParams p;
  CHECK(base_energy(false, p) == doctest::Approx(128.89));
  CHECK(base_energy(true, p) == doctest::Approx(170.32));
  p.step_minutes = 2.0;
  CHECK(base_energy(true, p) == doctest::Approx(340.64));
}

TEST_CASE("surveillance draw is linear in the radius") {
  EnergyParams p;
  CHECK(surveillance_energy(600.0, 600.0, p) == doctest::Approx(5.0));
  CHECK(surveillance_energy(400.0, 600.0, p) == doctest::Approx(5.0 * 2 / 3));
  CHECK(surveillance_energy(200.0, 600.0, p) == doctest::Approx(5.0 / 3));
  CHECK(surveillance_energy(300.0, 600.0, p) == doctest::Approx(2.5));
  p.step_minutes = 0.5;
  CHECK(surveillance_energy(600.0, 600.0, p) == doctest::Approx(2.5));

  EnergyParams q;
  CHECK_THROWS_AS(surveillance_energy(0.0, 600.0, q), InvalidRadius);
  CHECK_THROWS_AS(surveillance_energy(-1.0, 600.0, q), InvalidRadius);
  CHECK_THROWS_AS(surveillance_energy(600.5, 600.0, q), InvalidRadius);
}

TEST_CASE("symbolic form replaces the table when fully specified") {
  EnergyParams p;
  p.delta = 100.0;
  p.zeta = 0.1;
  p.altitude = 200.0;
  p.lift_power = 30.0;
  CHECK(p.symbolic());
  validate(p);
  // (delta + zeta*h)*t + lift*t, independent of moving
  CHECK(base_energy(false, p) == doctest::Approx(150.0));
  CHECK(base_energy(true, p) == doctest::Approx(150.0));
  p.step_minutes = 2.0;
  CHECK(base_energy(true, p) == doctest::Approx(300.0));

  EnergyParams partial;
  partial.delta = 100.0;
  CHECK_FALSE(partial.symbolic());
  CHECK_THROWS_AS(validate(partial), ConfigError);
}

TEST_CASE("parameter validation") {
  EnergyParams ok;
  validate(ok);

  EnergyParams slow_fly = ok;
  slow_fly.fly_power = 100.0;  // below hover
  CHECK_THROWS_AS(validate(slow_fly), ConfigError);

  EnergyParams negative = ok;
  negative.surveil_power_max = -1.0;
  CHECK_THROWS_AS(validate(negative), ConfigError);

  EnergyParams zero_step = ok;
  zero_step.step_minutes = 0.0;
  CHECK_THROWS_AS(validate(zero_step), ConfigError);
}

TEST_CASE("drain records the draws and clamps at zero") {
  EnergyLedger ledger;  // full 10000
  ledger = drain(ledger, 170.32, 5.0);
  CHECK(ledger.e_b == 170.32);
  CHECK(ledger.e_c == 5.0);
  CHECK(ledger.battery_remaining == doctest::Approx(10000.0 - 175.32));

  EnergyLedger low;
  low.battery_remaining = 100.0;
  low = drain(low, 128.89, 5.0);
  CHECK(low.battery_remaining == 0.0);
  low = drain(low, 128.89, 5.0);
  CHECK(low.battery_remaining == 0.0);  // stays dead
}

TEST_CASE("forty hovering steps at the smallest radius") {
  EnergyParams p;
  EnergyLedger ledger;
  double prev = ledger.battery_remaining;
  for (int t = 0; t < 40; ++t) {
    const double e_b = base_energy(false, p);
    const double e_c = surveillance_energy(200.0, 600.0, p);
    ledger = drain(ledger, e_b, e_c);
    CHECK(ledger.battery_remaining <= prev);
    prev = ledger.battery_remaining;
  }
  CHECK(ledger.battery_remaining ==
        doctest::Approx(10000.0 - 40.0 * (128.89 + 5.0 / 3.0)));
  CHECK(ledger.battery_remaining > 0.0);  // a full episode cannot kill a UAV
}
