#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "dqm/qp.hpp"

namespace dqm {

enum class SolveStatus : int {
  Optimal = 0,
  MaxIterations,
  Infeasible,
  Unbounded,
  NumericalFailure,
};

const char* status_name(SolveStatus s);

struct SolveOptions {
  double tol = 1e-9;        // scaled KKT residual target
  int max_iters = 200;
  double reg = 1e-8;        // static primal-dual regularization
  bool collect_history = false;
};

/// Primal-dual pair for the standard form. `mu` are equality duals (one per
/// G row, including every P/Q-definition row), `lambda` inequality duals
/// (one per H row, >= 0). `nu` is used by the coordination solver only.
struct PrimalDualSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd mu;
  Eigen::VectorXd lambda;
  Eigen::VectorXd nu;
  int iterations = 0;
  double objective = 0.0;
  double stat_res = 0.0, eq_res = 0.0, ineq_res = 0.0, comp_res = 0.0;
  double coord_res = 0.0;
  std::vector<double> residual_history;
  std::string message;
};

/// Interior-point solve of the full QP with duals for every row. On success
/// the scaled stationarity, feasibility, and complementarity residuals are
/// below opts.tol. Throws SolverError only on malformed input; solver
/// failures are reported in the status.
PrimalDualSolution solve_centralized(const StandardFormQP& qp,
                                     const SolveOptions& opts = {});

struct KktResiduals {
  double stationarity = 0.0;  // ||Mx + c + G'mu + H'lambda||_inf (scaled)
  double eq = 0.0;            // ||Gx - b||_inf
  double ineq = 0.0;          // ||(Hx - d)+||_inf
  double comp = 0.0;          // max |lambda_i (Hx - d)_i|
  double lambda_min = 0.0;    // most negative inequality dual
};

/// Evaluates the KKT system of `qp` at a candidate primal-dual point.
KktResiduals check_kkt(const StandardFormQP& qp, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& mu, const Eigen::VectorXd& lambda);

}  // namespace dqm
