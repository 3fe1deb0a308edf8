#pragma once

#include <string>

#include "dqm/atoms.hpp"
#include "dqm/qpsolve.hpp"

namespace dqm {

struct PacConfig {
  double rho = 1.0;
  /// Base dual step; the effective step is gamma / max(1, ||M||_inf).
  double gamma = 0.05;
  int max_iters = 20000;
  double tol_feas = 1e-6;   // ||G x - b||_inf target
  double tol_coord = 1e-6;  // ||B x||_inf target
  /// Local primal/inequality sweeps per communication round. One projected
  /// ascent pass per round leaves the inequality multipliers far from the
  /// local optimum and the outer iteration creeps; sweeping the prefactored
  /// solve and the max(0,.) ascent until the local pair settles restores the
  /// multiplier-method contraction.
  int inner_sweeps = 40;
  int workers = 1;
  /// Optional per-solve iteration trace (iteration, residuals, objective).
  std::string trace_path;
  int trace_every = 50;

  void validate() const;
};

/// Residual record of the current iterate.
struct PacResiduals {
  double eq = 0.0;          // max_j ||G_j a_j - b_j||_inf
  double coord = 0.0;       // ||B x||_inf
  double ineq = 0.0;        // max_j ||(H_j a_j - d_j)+||_inf
  double primal_change = 0.0;
};

/// State of the distributed iteration; exposed so tests can drive single
/// steps and inspect convergence behaviour.
class PacSolver {
 public:
  PacSolver(const AtomSystem& sys, const StandardFormQP& qp, const PacConfig& cfg);

  /// One full round of the iteration schedule: local primal updates, the
  /// projected ascent on inequality duals, equality-dual updates with
  /// extrapolation, a synchronization of primal estimates, coordination-dual
  /// updates with extrapolation, and a synchronization of the barred duals.
  void step();

  PacResiduals residuals() const;
  int iterations() const { return iter_; }

  /// Assembled solution on owner variables, with duals mapped back to the
  /// original rows. Estimates are discarded.
  PrimalDualSolution assemble() const;

  double objective() const;

 private:
  const AtomSystem& sys_;
  const StandardFormQP& qp_;
  PacConfig cfg_;
  double rho_, gamma_, pen_;
  int iter_ = 0;
  Eigen::VectorXd x_ext_;                    // primal, extended space
  Eigen::VectorXd x_ext_prev_;
  Eigen::VectorXd nu_, nubar_;               // coordination duals
  std::vector<Eigen::VectorXd> a_;           // local primal per atom
  std::vector<Eigen::VectorXd> mu_, mubar_, lambda_;
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> factor_;
  // Row-equilibrated local systems (scaled duals; unscaled on assembly).
  std::vector<Eigen::MatrixXd> gs_, hs_;
  std::vector<Eigen::VectorXd> bs_, ds_, gscale_, hscale_;
  std::vector<double> uzawa_step_;  // per-atom inequality ascent step
};

/// Runs the iteration to convergence (or max_iters, returning the best
/// iterate flagged MaxIterations). check_convergence is available on the
/// returned record via the residual fields.
PrimalDualSolution pac_iterate(const AtomSystem& sys, const StandardFormQP& qp,
                               const PacConfig& cfg);

/// Residuals of an externally supplied candidate point on the atom system.
PacResiduals check_convergence(const AtomSystem& sys, const Eigen::VectorXd& x_ext);

}  // namespace dqm
