#include <doctest.h>

#include <cstring>

#include "dqm/opf.hpp"
#include "dqm/pac.hpp"
#include "helpers.hpp"

using namespace dqm;

namespace {

/// min x^2 s.t. x = 1, split across two atoms: atom 0 owns x and its cost,
/// atom 1 holds an estimate coupled by the constraint and a coordination row.
AtomSystem scalar_system(StandardFormQP* qp) {
  qp->n = 1;
  qp->M.resize(1, 1);
  qp->M.insert(0, 0) = 2.0;
  qp->c = Eigen::VectorXd::Zero(1);
  qp->G.resize(1, 1);
  qp->G.insert(0, 0) = 1.0;
  qp->b = Eigen::VectorXd::Constant(1, 1.0);
  qp->H.resize(0, 1);
  qp->d.resize(0);
  qp->var_keys.resize(1);
  qp->eq_keys.resize(1);

  AtomSystem sys;
  sys.n_original = 1;
  sys.owner_of_var = {0};
  sys.original_of_ext = {0, 0};  // ext var 1 estimates var 0
  Atom a0;
  a0.id = 0;
  a0.vars = {0};
  a0.num_owned = 1;
  a0.M = Eigen::MatrixXd::Constant(1, 1, 2.0);
  a0.c = Eigen::VectorXd::Zero(1);
  a0.G = Eigen::MatrixXd::Zero(0, 1);
  a0.b = Eigen::VectorXd::Zero(0);
  a0.H = Eigen::MatrixXd::Zero(0, 1);
  a0.d = Eigen::VectorXd::Zero(0);
  Atom a1;
  a1.id = 1;
  a1.vars = {1};
  a1.num_owned = 0;
  a1.M = Eigen::MatrixXd::Zero(1, 1);
  a1.c = Eigen::VectorXd::Zero(1);
  a1.G = Eigen::MatrixXd::Constant(1, 1, 1.0);  // x_hat = 1
  a1.b = Eigen::VectorXd::Constant(1, 1.0);
  a1.H = Eigen::MatrixXd::Zero(0, 1);
  a1.d = Eigen::VectorXd::Zero(0);
  a1.eq_rows = {0};

  sys.graph.n_ext = 2;
  sys.graph.rows.push_back({1, 0, 1});
  sys.graph.B.resize(1, 2);
  sys.graph.B.insert(0, 1) = 1.0;
  sys.graph.B.insert(0, 0) = -1.0;
  a0.b_entries.push_back({0, 0, -1.0});
  a1.b_entries.push_back({0, 0, +1.0});
  a1.assigned_rows.push_back(0);
  sys.atoms.push_back(std::move(a0));
  sys.atoms.push_back(std::move(a1));
  return sys;
}

}  // namespace

TEST_CASE("scalar toy: two atoms agree on x = 1 with consistent duals") {
  StandardFormQP qp;
  const AtomSystem sys = scalar_system(&qp);
  PacConfig cfg;
  cfg.gamma = 0.5;
  cfg.max_iters = 20000;
  const PrimalDualSolution sol = pac_iterate(sys, qp, cfg);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(sol.coord_res < 1e-6);
  CHECK(sol.eq_res < 1e-6);
  // Stationarity of atom 0: 2x - nu = 0, so nu is near 2.
  CHECK(sol.nu[0] == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("lambda stays nonnegative at every iteration") {
  const NetworkModel net = test::two_bus();
  const DeviceSet ds = test::two_bus_devices(net);
  const PeriodInput in = test::flat_period(ds);
  const NodalBounds bounds = tighten_bounds(net, ds, in, 3);
  const StandardFormQP qp = assemble_qp(net, ds, in, bounds);
  const AtomSystem sys = atomize(qp, net);
  PacConfig cfg;
  PacSolver solver(sys, qp, cfg);
  for (int k = 0; k < 100; ++k) {
    solver.step();
    const PrimalDualSolution sol = solver.assemble();
    if (sol.lambda.size()) CHECK(sol.lambda.minCoeff() >= 0.0);
  }
}

TEST_CASE("two-bus OPF: PAC matches the centralized oracle") {
  const NetworkModel net = test::two_bus();
  const DeviceSet ds = test::two_bus_devices(net);
  const PeriodInput in = test::flat_period(ds);
  const NodalBounds bounds = tighten_bounds(net, ds, in, 3);
  const StandardFormQP qp = assemble_qp(net, ds, in, bounds);

  const PrimalDualSolution oracle = solve_centralized(qp);
  REQUIRE(oracle.status == SolveStatus::Optimal);

  const AtomSystem sys = atomize(qp, net);
  PacConfig cfg;
  cfg.max_iters = 60000;
  const PrimalDualSolution pac = pac_iterate(sys, qp, cfg);
  REQUIRE(pac.status == SolveStatus::Optimal);

  const double xscale = 1.0 + oracle.x.cwiseAbs().maxCoeff();
  for (int v = 0; v < qp.n; ++v)
    CHECK(std::abs(pac.x[v] - oracle.x[v]) / xscale <= 1e-4);
  CHECK(std::abs(pac.objective - oracle.objective) /
            (1.0 + std::abs(oracle.objective)) <= 1e-4);
  for (int j = 0; j < net.num_buses(); ++j)
    for (Phase ph : kAllPhases) {
      CHECK(std::abs(pac.mu[qp.pdef_row(j, ph)] -
                     oracle.mu[qp.pdef_row(j, ph)]) <= 1e-3);
      CHECK(std::abs(pac.mu[qp.qdef_row(j, ph)] -
                     oracle.mu[qp.qdef_row(j, ph)]) <= 1e-3);
    }
}

TEST_CASE("large rho keeps the iteration bounded with non-increasing residuals") {
  const NetworkModel net = test::two_bus();
  const DeviceSet ds = test::two_bus_devices(net);
  const PeriodInput in = test::flat_period(ds);
  const NodalBounds bounds = tighten_bounds(net, ds, in, 3);
  const StandardFormQP qp = assemble_qp(net, ds, in, bounds);
  const AtomSystem sys = atomize(qp, net);
  PacConfig cfg;
  cfg.rho = 1e4;
  PacSolver solver(sys, qp, cfg);
  solver.step();
  const PacResiduals first = solver.residuals();
  PacResiduals last = first;
  for (int k = 1; k < 50; ++k) {
    solver.step();
    last = solver.residuals();
    CHECK(std::isfinite(last.eq));
    CHECK(std::isfinite(last.coord));
  }
  CHECK(last.eq <= first.eq + 1e-9);
  CHECK(last.coord <= first.coord + 1e-9);
}

TEST_CASE("iterates are bit-identical regardless of worker count") {
  const NetworkModel net = test::five_bus();
  const DeviceSet ds = test::five_bus_devices(net);
  const PeriodInput in = test::flat_period(ds);
  const NodalBounds bounds = tighten_bounds(net, ds, in, 3);
  const StandardFormQP qp = assemble_qp(net, ds, in, bounds);
  const AtomSystem sys = atomize(qp, net);
  PacConfig one, four;
  one.max_iters = 500;
  four.max_iters = 500;
  four.workers = 4;
  const PrimalDualSolution a = pac_iterate(sys, qp, one);
  const PrimalDualSolution b = pac_iterate(sys, qp, four);
  REQUIRE(a.x.size() == b.x.size());
  CHECK(std::memcmp(a.x.data(), b.x.data(), sizeof(double) * a.x.size()) == 0);
}

TEST_CASE("check_convergence: exact feasible point has zero residuals") {
  StandardFormQP qp;
  const AtomSystem sys = scalar_system(&qp);
  Eigen::VectorXd x_ext(2);
  x_ext << 1.0, 1.0;
  const PacResiduals res = check_convergence(sys, x_ext);
  CHECK(res.eq == doctest::Approx(0.0));
  CHECK(res.coord == doctest::Approx(0.0));
  CHECK(res.ineq == doctest::Approx(0.0));
}
