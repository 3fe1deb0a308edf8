#include <doctest.h>

#include "dqm/opf.hpp"
#include "dqm/qpsolve.hpp"
#include "helpers.hpp"

using namespace dqm;

namespace {

/// Small hand-built QP helper.
StandardFormQP make_qp(int n, const std::vector<Eigen::Triplet<double>>& m,
                       const std::vector<double>& c,
                       const std::vector<std::tuple<int, int, double>>& g,
                       const std::vector<double>& b,
                       const std::vector<std::tuple<int, int, double>>& h,
                       const std::vector<double>& d) {
  StandardFormQP qp;
  qp.n = n;
  qp.M.resize(n, n);
  qp.M.setFromTriplets(m.begin(), m.end());
  qp.c = Eigen::Map<const Eigen::VectorXd>(c.data(), c.size());
  std::vector<Eigen::Triplet<double>> gt, ht;
  for (auto [r, col, v] : g) gt.emplace_back(r, col, v);
  for (auto [r, col, v] : h) ht.emplace_back(r, col, v);
  qp.G.resize(static_cast<int>(b.size()), n);
  qp.G.setFromTriplets(gt.begin(), gt.end());
  qp.b = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
  qp.H.resize(static_cast<int>(d.size()), n);
  qp.H.setFromTriplets(ht.begin(), ht.end());
  qp.d = Eigen::Map<const Eigen::VectorXd>(d.data(), d.size());
  qp.var_keys.resize(n);
  qp.eq_keys.resize(b.size());
  qp.ineq_classes.resize(d.size(), IneqClass::BoundHi);
  return qp;
}

}  // namespace

TEST_CASE("min x^2 subject to x >= 1: x = 1, inequality dual 2") {
  // H row: -x <= -1.
  const StandardFormQP qp =
      make_qp(1, {{0, 0, 2.0}}, {0.0}, {}, {}, {{0, 0, -1.0}}, {-1.0});
  const PrimalDualSolution sol = solve_centralized(qp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  // Stationarity 2x - lambda = 0 at x = 1.
  CHECK(sol.lambda[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sol.stat_res < 1e-8);
  CHECK(sol.comp_res < 1e-8);
}

TEST_CASE("min 0.5 x'x subject to 1'x = n: x is the all-one vector") {
  const int n = 5;
  std::vector<Eigen::Triplet<double>> m;
  for (int i = 0; i < n; ++i) m.emplace_back(i, i, 1.0);
  std::vector<std::tuple<int, int, double>> g;
  for (int i = 0; i < n; ++i) g.emplace_back(0, i, 1.0);
  const StandardFormQP qp =
      make_qp(n, m, std::vector<double>(n, 0.0), g, {double(n)}, {}, {});
  const PrimalDualSolution sol = solve_centralized(qp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  for (int i = 0; i < n; ++i) CHECK(sol.x[i] == doctest::Approx(1.0).epsilon(1e-8));
  // With the Lagrangian f + mu (Gx - b), stationarity x_i + mu = 0 gives
  // mu = -1 (the spec's unsigned expectation |mu| = 1).
  CHECK(sol.mu[0] == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("presolve eliminates fixed-variable chains and recovers duals") {
  // min (x0 - 2)^2 + x1^2 + x2^2
  //   s.t. x0 = 1 (single-entry), x0 + x1 = 3 (becomes single-entry), x2 free.
  const StandardFormQP qp = make_qp(
      3, {{0, 0, 2.0}, {1, 1, 2.0}, {2, 2, 2.0}}, {-4.0, 0.0, 0.0},
      {{0, 0, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}}, {1.0, 3.0}, {}, {});
  const PrimalDualSolution sol = solve_centralized(qp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.x[1] == doctest::Approx(2.0));
  CHECK(sol.x[2] == doctest::Approx(0.0));
  // Full-system KKT must hold including the eliminated rows' duals.
  const KktResiduals kk = check_kkt(qp, sol.x, sol.mu, sol.lambda);
  CHECK(kk.stationarity < 1e-8);
  // Row 1 dual balances x1: 2 x1 + mu1 = 0.
  CHECK(sol.mu[1] == doctest::Approx(-4.0));
  // Row 0 dual balances x0: 2 x0 - 4 + mu0 + mu1 = 0.
  CHECK(sol.mu[0] == doctest::Approx(6.0));
}

TEST_CASE("conflicting fixed values are infeasible") {
  const StandardFormQP qp = make_qp(1, {{0, 0, 2.0}}, {0.0},
                                    {{0, 0, 1.0}, {1, 0, 1.0}}, {1.0, 2.0}, {}, {});
  const PrimalDualSolution sol = solve_centralized(qp);
  CHECK(sol.status == SolveStatus::Infeasible);
  CHECK(!sol.message.empty());
}

TEST_CASE("empty bound interval is infeasible") {
  // x >= 1 and x <= 0.
  const StandardFormQP qp = make_qp(1, {{0, 0, 2.0}}, {0.0}, {}, {},
                                    {{0, 0, -1.0}, {1, 0, 1.0}}, {-1.0, 0.0});
  const PrimalDualSolution sol = solve_centralized(qp);
  CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("assembled two-bus OPF satisfies KKT at 1e-8") {
  const NetworkModel net = test::two_bus();
  const DeviceSet ds = test::two_bus_devices(net);
  const PeriodInput in = test::flat_period(ds);
  const NodalBounds bounds = tighten_bounds(net, ds, in, 3);
  const StandardFormQP qp = assemble_qp(net, ds, in, bounds);
  const PrimalDualSolution sol = solve_centralized(qp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.stat_res < 1e-8);
  CHECK(sol.eq_res < 1e-8);
  CHECK(sol.ineq_res < 1e-8);
  CHECK(sol.comp_res < 1e-8);
  CHECK(sol.lambda.minCoeff() >= -1e-12);
}

TEST_CASE("oracle duals match finite-difference load sensitivity within 5%") {
  const NetworkModel net = test::two_bus();
  DeviceSet ds = test::two_bus_devices(net);
  const PeriodInput in = test::flat_period(ds);
  const NodalBounds bounds = tighten_bounds(net, ds, in, 3);
  const StandardFormQP qp = assemble_qp(net, ds, in, bounds);
  const PrimalDualSolution sol = solve_centralized(qp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  const double price_q = -sol.mu[qp.qdef_row(1, Phase::A)];

  // Bump the fixed Q demand of the phase-a load at bus 2 by delta. The
  // boxes stay frozen so only the demand pin moves; the dual predicts the
  // objective response of that single right-hand side.
  const double delta = 1e-4;
  DeviceSet bumped = ds;
  bumped.loads[0].q += delta;
  const StandardFormQP qp2 = assemble_qp(net, bumped, in, bounds);
  const PrimalDualSolution sol2 = solve_centralized(qp2);
  REQUIRE(sol2.status == SolveStatus::Optimal);
  const double fd = (sol2.objective - sol.objective) / delta;
  CHECK(std::abs(fd - price_q) <= 0.05 * std::abs(price_q));
}

TEST_CASE("unbounded problem is flagged, not returned as optimal") {
  // min x with no constraints.
  const StandardFormQP qp = make_qp(1, {}, {1.0}, {}, {}, {}, {});
  const PrimalDualSolution sol = solve_centralized(qp);
  CHECK(sol.status != SolveStatus::Optimal);
}
