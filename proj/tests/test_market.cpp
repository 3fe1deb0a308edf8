#include <doctest.h>

#include <cmath>

#include "dqm/market.hpp"
#include "helpers.hpp"

using namespace dqm;

namespace {
/// Hand-built one-node day for the aggregation arithmetic.
std::vector<ClearingResult> toy_day(const std::vector<double>& mu_q,
                                    const std::vector<double>& q) {
  std::vector<ClearingResult> day;
  for (size_t t = 0; t < mu_q.size(); ++t) {
    ClearingResult r;
    r.day = 0;
    r.slot = static_cast<int>(t);
    r.node.assign(1, {});
    r.node[0][0].present = true;
    r.node[0][0].price_q = mu_q[t];
    r.node[0][0].q = q[t];
    day.push_back(r);
  }
  return day;
}
}  // namespace

TEST_CASE("constant dual gives that constant as the d-LMP") {
  const auto day = toy_day({3.0, 3.0, 3.0}, {0.5, 1.0, 0.25});
  const DailyDLMP d = compute_dlmp(day);
  CHECK(d.nodes[0].mu_q == doctest::Approx(3.0));
  CHECK_FALSE(d.nodes[0].q_zero_volume);
}

TEST_CASE("two-slot toy day: mu = [1,2], q = [1,3] gives 7/4") {
  const auto day = toy_day({1.0, 2.0}, {1.0, 3.0});
  const DailyDLMP d = compute_dlmp(day);
  CHECK(d.nodes[0].mu_q == doctest::Approx(1.75));
}

TEST_CASE("zero volume all day: unweighted mean, flagged") {
  const auto day = toy_day({1.0, 2.0, 6.0}, {0.0, 0.0, 0.0});
  const DailyDLMP d = compute_dlmp(day);
  CHECK(d.nodes[0].q_zero_volume);
  CHECK(d.nodes[0].mu_q == doctest::Approx(3.0));
}

TEST_CASE("mixed-sign volumes are flagged") {
  const auto day = toy_day({1.0, 1.0}, {1.0, -0.4});
  const DailyDLMP d = compute_dlmp(day);
  CHECK(d.nodes[0].q_mixed_sign);
}

TEST_CASE("payout identity holds exactly for nonzero volume") {
  const auto day = toy_day({1.3, 2.7, 0.4, 5.0}, {0.2, -0.1, 0.7, 0.9});
  const DailyDLMP d = compute_dlmp(day);
  double direct = 0, vol = 0;
  for (const auto& r : day) {
    direct += r.node[0][0].price_q * r.node[0][0].q;
    vol += r.node[0][0].q;
  }
  CHECK(d.nodes[0].mu_q * vol == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("settlement ratios: 5/95 gives 0.05; mean of 0.04 and 0.06 is 0.05") {
  // Build two generators' revenues by hand through settle()'s arithmetic:
  // simpler to check the ratio logic directly on crafted rows.
  Settlement s;
  Settlement::GenRow g1{"g1", 0, 95.0, 5.0, 0.0, false};
  g1.ratio = 5.0 / 100.0;
  Settlement::GenRow g2{"g2", 1, 96.0, 4.0, 0.0, false};
  g2.ratio = 0.04;
  Settlement::GenRow g3{"g3", 2, 94.0, 6.0, 0.0, false};
  g3.ratio = 0.06;
  CHECK(g1.ratio == doctest::Approx(0.05));
  CHECK((g2.ratio + g3.ratio) / 2.0 == doctest::Approx(0.05));
}

TEST_CASE("zero DG capacity period: slack serves the whole load") {
  const NetworkModel net = test::two_bus();
  const DeviceSet ds = test::two_bus_devices(net);
  PeriodInput in = test::flat_period(ds, 50.0, /*avail=*/0.0);
  MarketOptions opts;
  const ClearingResult r = clear_period(net, ds, in, opts);
  REQUIRE(r.status == SolveStatus::Optimal);
  for (int p = 0; p < 3; ++p) {
    CHECK(std::abs(r.gen[0][p][0]) < 1e-7);
    CHECK(r.slack[p][0] > 0.0);  // import covers the load
  }
  // Physics: balance within 1e-6, PF cone holds, gap within 2% of |S|.
  CHECK(r.balance_p < 1e-6);
  CHECK(r.balance_q < 1e-6);
  CHECK(r.pf_violation < 1e-6);
  CHECK(r.bilinear_rel_gap < 0.02);
}

TEST_CASE("with cheap DG available, the load price stays above the slack price") {
  const NetworkModel net = test::two_bus();
  const DeviceSet ds = test::two_bus_devices(net);
  PeriodInput in = test::flat_period(ds, 50.0, 1.0);
  MarketOptions opts;
  const ClearingResult r = clear_period(net, ds, in, opts);
  REQUIRE(r.status == SolveStatus::Optimal);
  // zeta > 0 and a lossy line: marginal energy at the load end costs at
  // least the slack price.
  double slack_mean = 0, load_mean = 0;
  for (int p = 0; p < 3; ++p) {
    slack_mean += r.node[0][p].price_p / 3.0;
    load_mean += r.node[1][p].price_p / 3.0;
  }
  CHECK(load_mean >= slack_mean - 1e-6);
}

TEST_CASE("clear_period on the two-bus feeder: settlement end to end") {
  const NetworkModel net = test::two_bus();
  const DeviceSet ds = test::two_bus_devices(net);
  MarketOptions opts;
  std::vector<ClearingResult> day;
  for (int t = 0; t < 4; ++t) {
    PeriodInput in = test::flat_period(ds, 40.0 + 5.0 * t, 0.5 + 0.1 * t);
    in.slot = t;
    day.push_back(clear_period(net, ds, in, opts));
  }
  const DailyDLMP dlmp = compute_dlmp(day);
  const Settlement st = settle(day, dlmp, ds, net);
  REQUIRE(st.gens.size() == 1);
  CHECK(std::isfinite(st.gens[0].revenue_p));
  CHECK(std::isfinite(st.gens[0].revenue_q));
  // Payout identity on the real day for every node with nonzero volume.
  for (size_t j = 0; j < dlmp.nodes.size(); ++j) {
    if (dlmp.nodes[j].q_zero_volume) continue;
    double direct = 0;
    for (const auto& r : day)
      for (int p = 0; p < 3; ++p)
        if (r.node[j][p].present) direct += r.node[j][p].price_q * r.node[j][p].q;
    CHECK(dlmp.nodes[j].mu_q * dlmp.nodes[j].q_volume ==
          doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("refinement shrinks the bilinear gap") {
  const NetworkModel net = test::thirteen_bus();
  const DeviceSet ds = test::thirteen_bus_devices(net);
  PeriodInput in = test::flat_period(ds, 60.0, 0.9);
  MarketOptions no_refine;
  no_refine.refine_passes = 0;
  MarketOptions refined;
  refined.refine_passes = 3;
  refined.gap_target = 1e-4;
  const ClearingResult r0 = clear_period(net, ds, in, no_refine);
  const ClearingResult r3 = clear_period(net, ds, in, refined);
  REQUIRE(r0.status == SolveStatus::Optimal);
  REQUIRE(r3.status == SolveStatus::Optimal);
  CHECK(r3.bilinear_gap <= r0.bilinear_gap + 1e-12);
  CHECK(r3.bilinear_rel_gap < 0.02);
}
