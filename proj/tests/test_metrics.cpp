#include <doctest.h>

#include <cmath>

#include "dqm/metrics.hpp"
#include "dqm/profiles.hpp"
#include "helpers.hpp"

using namespace dqm;

namespace {
ClearingResult with_devices(double gen_p, double gen_q, double load_p,
                            double load_q) {
  ClearingResult r;
  r.node.assign(1, {});
  r.gen.assign(1, {});
  r.gen[0][0][0] = gen_p;
  r.gen[0][0][1] = gen_q;
  r.load.assign(1, {});
  r.load[0][0] = load_p;
  r.load[0][1] = load_q;
  return r;
}
}  // namespace

TEST_CASE("dg penetration: 600 kW nameplate over 500 kW average load is 1.2") {
  DeviceSet ds;
  Generator g;
  g.phases = PhaseMask::parse("abc");
  g.p_max = {200, 200, 200};
  ds.generators.push_back(g);
  CHECK(dg_penetration(ds, 500.0) == doctest::Approx(1.2));
  DeviceSet none;
  CHECK(dg_penetration(none, 500.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(dg_penetration(ds, 0.0), ValidationError);
}

TEST_CASE("energy penetration: no DG is 0; DG at half of a unity-PF load is 0.5") {
  std::vector<ClearingResult> none{with_devices(0, 0, 1.0, 0)};
  CHECK(dg_energy_penetration(none) == doctest::Approx(0.0));
  std::vector<ClearingResult> half{with_devices(0.5, 0, 1.0, 0)};
  CHECK(dg_energy_penetration(half) == doctest::Approx(0.5));
}

TEST_CASE("q utilization: an island serving its own reactive load is 1") {
  std::vector<ClearingResult> day{with_devices(1.0, 0.4, 1.0, 0.4)};
  CHECK(dg_q_utilization(day) == doctest::Approx(1.0));
  CHECK(dg_p_utilization(day) == doctest::Approx(1.0));
}

TEST_CASE("network losses: zero current is 0; R=0.01, I=(1,0) is 0.01") {
  ClearingResult quiet;
  quiet.loss_p = 0.0;
  CHECK(network_losses({quiet}) == doctest::Approx(0.0));
  ClearingResult one;
  one.loss_p = 0.01;  // R * (IFR^2 + IFI^2) with R=0.01, IF=(1,0)
  CHECK(network_losses({one}) == doctest::Approx(0.01));
}

TEST_CASE("mean voltage over nodes and time") {
  ClearingResult r;
  r.node.assign(2, {});
  r.node[0][0].present = true;
  r.node[0][0].vr = 0.99;
  r.node[1][0].present = true;
  r.node[1][0].vr = 1.01;
  CHECK(mean_voltage({r}, {0, 1}) == doctest::Approx(1.0));
  ClearingResult flat;
  flat.node.assign(1, {});
  flat.node[0][0].present = true;
  flat.node[0][0].vr = 1.0;
  CHECK(mean_voltage({flat}, {0}) == doctest::Approx(1.0));
}

TEST_CASE("coefficient of variation uses the population deviation") {
  CHECK(coeff_variation({5.0, 5.0, 5.0}) == doctest::Approx(0.0));
  // std_pop([1,2,3]) = sqrt(2/3), mean 2 -> 0.40825.
  CHECK(coeff_variation({1.0, 2.0, 3.0}) == doctest::Approx(0.408248).epsilon(1e-5));
  CHECK(coeff_variation({}) == doctest::Approx(0.0));
}

TEST_CASE("power factor from phase sums") {
  CHECK(power_factor(1.0, 0.0) == doctest::Approx(1.0));
  // Per-phase P=1, Q=0.4843 summed over three phases: PF 0.900.
  CHECK(power_factor(3.0, 3 * 0.484322) == doctest::Approx(0.9).epsilon(1e-5));
}

TEST_CASE("synthetic profiles: shapes in range, deterministic under the seed") {
  const ProfileSet a = make_synthetic_profiles(7, 288, 7);
  const ProfileSet b = make_synthetic_profiles(7, 288, 7);
  REQUIRE(a.pv.size() == 288);
  for (int t = 0; t < 288; ++t) {
    CHECK(a.pv[t] >= 0.0);
    CHECK(a.pv[t] <= 1.0);
    CHECK(a.load_shape[t] > 0.0);
    CHECK(a.load_shape[t] <= 1.0 + 1e-12);
    CHECK(a.lambda[t] >= 20.0);
    CHECK(a.pv[t] == b.pv[t]);
    CHECK(a.lambda[t] == b.lambda[t]);
  }
  // Night slots have no PV.
  CHECK(a.pv[0] == 0.0);
  CHECK(a.pv[287] == 0.0);
  // Midday has plenty.
  CHECK(a.pv[288 / 2] > 0.8);
}

TEST_CASE("load multipliers are clipped to (0.5, 1.5) and seeded") {
  ProfileSet ps;
  Rng r1(99), r2(99);
  draw_load_multipliers(&ps, 500, &r1);
  for (double m : ps.load_multiplier) {
    CHECK(m > 0.5);
    CHECK(m < 1.5);
  }
  ProfileSet ps2;
  draw_load_multipliers(&ps2, 500, &r2);
  CHECK(ps.load_multiplier == ps2.load_multiplier);
}
