#include <doctest.h>

#include <cmath>

#include "dqm/bounds.hpp"
#include "helpers.hpp"

using namespace dqm;

TEST_CASE("interval arithmetic basics") {
  const Interval a{-1, 2}, b{3, 4};
  CHECK((a + b).lo == 2);
  CHECK((a + b).hi == 6);
  CHECK((a - b).lo == -5);
  CHECK((a - b).hi == -1);
  CHECK((a * b).lo == -4);
  CHECK((a * b).hi == 8);
  CHECK(a.div_pos(b).lo == doctest::Approx(-1.0 / 3.0));
  CHECK(a.div_pos(b).hi == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(Interval{0, 1}.meet(Interval{2, 3}).has_value());
  const auto m = Interval{0, 2}.meet(Interval{1, 3});
  REQUIRE(m.has_value());
  CHECK(m->lo == 1);
  CHECK(m->hi == 2);
}

TEST_CASE("sector ranges cover the phasor arc") {
  // Phase a, +-10 degrees, magnitudes [0.95, 1.05].
  const double d = 10.0 * 3.14159265358979 / 180.0;
  const Interval re = sector_cos_range(0.95, 1.05, -d, d);
  const Interval im = sector_sin_range(0.95, 1.05, -d, d);
  CHECK(re.hi == doctest::Approx(1.05));
  CHECK(re.lo == doctest::Approx(0.95 * std::cos(d)));
  CHECK(im.hi == doctest::Approx(1.05 * std::sin(d)));
  CHECK(im.lo == doctest::Approx(-1.05 * std::sin(d)));
  // Phase b around -120 degrees contains the rotated unit phasor.
  const double tb = phase_angle(Phase::B);
  CHECK(sector_cos_range(0.95, 1.05, tb - d, tb + d).contains(std::cos(tb)));
  CHECK(sector_sin_range(0.95, 1.05, tb - d, tb + d).contains(std::sin(tb)));
}

TEST_CASE("zero-load zero-generation feeder: currents collapse, voltages stay") {
  const NetworkModel net = test::two_bus();
  DeviceSet empty;  // no devices at all
  PeriodInput in;
  in.lambda_p = 50.0;
  const NodalBounds b = tighten_bounds(net, empty, in, 3);
  for (int j = 0; j < 2; ++j)
    for (int p = 0; p < 3; ++p) {
      CHECK(std::abs(b.ir[j][p].lo) <= 1e-9);
      CHECK(std::abs(b.ir[j][p].hi) <= 1e-9);
      CHECK(std::abs(b.ii[j][p].lo) <= 1e-9);
      CHECK(std::abs(b.ii[j][p].hi) <= 1e-9);
    }
  // Voltage bounds equal the input sector box.
  BoundsOptions opts;
  const double d = opts.angle_halfwidth_deg * 3.14159265358979 / 180.0;
  for (int j = 0; j < 2; ++j)
    for (Phase ph : kAllPhases) {
      const double t = phase_angle(ph);
      const Interval want_r = sector_cos_range(0.95, 1.05, t - d, t + d);
      const Interval want_i = sector_sin_range(0.95, 1.05, t - d, t + d);
      CHECK(b.vr[j][phase_index(ph)].lo == doctest::Approx(want_r.lo));
      CHECK(b.vr[j][phase_index(ph)].hi == doctest::Approx(want_r.hi));
      CHECK(b.vi[j][phase_index(ph)].lo == doctest::Approx(want_i.lo));
      CHECK(b.vi[j][phase_index(ph)].hi == doctest::Approx(want_i.hi));
    }
}

TEST_CASE("100 kW unity-PF load: current magnitude bound from interval division") {
  const NetworkModel net = test::two_bus();
  DeviceSet ds;
  Load l;
  l.id = "l";
  l.bus = 2;
  l.phase = Phase::A;
  l.p = 100.0 / net.base_kva_1ph();  // p.u.
  l.q = 0.0;
  ds.loads.push_back(l);
  PeriodInput in;
  in.lambda_p = 50.0;
  in.load_scale = {1.0};
  const NodalBounds b = tighten_bounds(net, ds, in, 1);
  const double d_pu = 100.0 / net.base_kva_1ph();
  const double want = d_pu / 0.95;
  const double got = std::max(std::abs(b.ir[1][0].lo), std::abs(b.ir[1][0].hi));
  CHECK(got >= want - 1e-12);        // bound can never cut the worst case
  CHECK(got <= 1.10 * want);         // and is within 10% of it
}

TEST_CASE("more rounds only tighten: rounds=5 contained in rounds=1") {
  const NetworkModel net = test::thirteen_bus();
  const DeviceSet ds = test::thirteen_bus_devices(net);
  const PeriodInput in = test::flat_period(ds);
  const NodalBounds b1 = tighten_bounds(net, ds, in, 1);
  const NodalBounds b5 = tighten_bounds(net, ds, in, 5);
  for (int j = 0; j < net.num_buses(); ++j)
    for (int p = 0; p < 3; ++p) {
      CHECK(b5.vr[j][p].lo >= b1.vr[j][p].lo - 1e-12);
      CHECK(b5.vr[j][p].hi <= b1.vr[j][p].hi + 1e-12);
      CHECK(b5.ir[j][p].lo >= b1.ir[j][p].lo - 1e-12);
      CHECK(b5.ir[j][p].hi <= b1.ir[j][p].hi + 1e-12);
      CHECK(b5.ii[j][p].lo >= b1.ii[j][p].lo - 1e-12);
      CHECK(b5.ii[j][p].hi <= b1.ii[j][p].hi + 1e-12);
    }
}

TEST_CASE("soundness: exact power-flow point lies inside the boxes") {
  const NetworkModel net = test::five_bus();
  DeviceSet loads_only = test::five_bus_devices(net);
  loads_only.generators.clear();
  const PeriodInput in = test::flat_period(loads_only);
  const test::PfSolution pf = test::solve_pf_fixed_loads(net, loads_only, in);
  REQUIRE(pf.converged);
  for (int rounds : {1, 2, 5}) {
    const NodalBounds b = tighten_bounds(net, loads_only, in, rounds);
    for (int j = 0; j < net.num_buses(); ++j)
      for (Phase ph : kAllPhases) {
        if (!net.buses()[j].phases.has(ph)) continue;
        const int p = phase_index(ph);
        CHECK(b.vr[j][p].contains(pf.v[j][p].real(), 1e-9));
        CHECK(b.vi[j][p].contains(pf.v[j][p].imag(), 1e-9));
        CHECK(b.ir[j][p].contains(pf.i_inj[j][p].real(), 1e-9));
        CHECK(b.ii[j][p].contains(pf.i_inj[j][p].imag(), 1e-9));
      }
    for (int e = 0; e < net.num_lines(); ++e)
      for (Phase ph : kAllPhases) {
        if (!net.lines()[e].phases().has(ph)) continue;
        const int p = phase_index(ph);
        CHECK(b.ifr[e][p].contains(pf.i_flow[e][p].real(), 1e-9));
        CHECK(b.ifi[e][p].contains(pf.i_flow[e][p].imag(), 1e-9));
      }
  }
}

TEST_CASE("infeasible instance reports the offending node-phase") {
  const NetworkModel net = test::two_bus();
  DeviceSet ds;
  Load l;
  l.id = "huge";
  l.bus = 2;
  l.phase = Phase::A;
  l.p = 5000.0 / net.base_kva_1ph();  // far beyond the 400 A ampacity
  l.q = 0.0;
  ds.loads.push_back(l);
  PeriodInput in;
  in.lambda_p = 50.0;
  in.load_scale = {1.0};
  CHECK_THROWS_WITH_AS(tighten_bounds(net, ds, in, 3),
                       doctest::Contains("bus 2"), SolverError);
}

TEST_CASE("refine_around shrinks but never grows") {
  const NetworkModel net = test::two_bus();
  const DeviceSet ds = test::two_bus_devices(net);
  const PeriodInput in = test::flat_period(ds);
  const NodalBounds b = tighten_bounds(net, ds, in, 2);
  RefApoint at;
  at.vr.assign(2, {1.0, -0.5, -0.5});
  at.vi.assign(2, {0.0, -0.8, 0.8});
  at.ir.assign(2, {0.0, 0.0, 0.0});
  at.ii.assign(2, {0.0, 0.0, 0.0});
  const NodalBounds r = refine_around(b, at, 0.25, 1e-4);
  for (int j = 0; j < 2; ++j)
    for (int p = 0; p < 3; ++p) {
      CHECK(r.vr[j][p].lo >= b.vr[j][p].lo - 1e-15);
      CHECK(r.vr[j][p].hi <= b.vr[j][p].hi + 1e-15);
      CHECK(r.vr[j][p].valid());
      CHECK(r.ir[j][p].width() <= b.ir[j][p].width() + 1e-15);
    }
}
