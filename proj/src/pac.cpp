#include "dqm/pac.hpp"

#include <cstdio>
#include <fstream>

namespace dqm {

void PacConfig::validate() const {
  if (rho <= 0 || gamma <= 0)
    throw ValidationError("pac config: rho and gamma must be positive");
  if (tol_feas <= 0 || tol_coord <= 0)
    throw ValidationError("pac config: tolerances must be positive");
  if (max_iters < 1) throw ValidationError("pac config: max_iters must be >= 1");
}

PacSolver::PacSolver(const AtomSystem& sys, const StandardFormQP& qp,
                     const PacConfig& cfg)
    : sys_(sys), qp_(qp), cfg_(cfg) {
  cfg_.validate();
  rho_ = cfg.rho;
  Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(qp.n);
  for (int k = 0; k < qp.M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(qp.M, k); it; ++it)
      rowsum[it.row()] += std::abs(it.value());
  const double mnorm = qp.n ? rowsum.maxCoeff() : 0.0;
  gamma_ = cfg.gamma / std::max(1.0, mnorm);

  const int natoms = static_cast<int>(sys.atoms.size());
  x_ext_ = Eigen::VectorXd::Zero(sys.graph.n_ext);
  x_ext_prev_ = x_ext_;
  nu_ = Eigen::VectorXd::Zero(sys.graph.B.rows());
  nubar_ = nu_;
  a_.resize(natoms);
  mu_.resize(natoms);
  mubar_.resize(natoms);
  lambda_.resize(natoms);
  factor_.resize(natoms);
  // The barred duals extrapolate one dual step ahead, so the primal sees an
  // effective ascent coefficient of 2*rho*gamma; the local augmented penalty
  // must match it or the constraint-dominated directions only oscillate.
  pen_ = 2.0 * rho_ * gamma_;
  gs_.resize(natoms);
  hs_.resize(natoms);
  bs_.resize(natoms);
  ds_.resize(natoms);
  gscale_.resize(natoms);
  hscale_.resize(natoms);
  for (int j = 0; j < natoms; ++j) {
    const Atom& at = sys.atoms[j];
    const int nv = static_cast<int>(at.vars.size());
    a_[j] = Eigen::VectorXd::Zero(nv);
    mu_[j] = Eigen::VectorXd::Zero(at.G.rows());
    mubar_[j] = mu_[j];
    lambda_[j] = Eigen::VectorXd::Zero(at.H.rows());
    // Row equilibration keeps every constraint's loop gain comparable.
    gs_[j] = at.G;
    bs_[j] = at.b;
    gscale_[j] = Eigen::VectorXd::Ones(at.G.rows());
    for (int r = 0; r < at.G.rows(); ++r) {
      const double n = at.G.row(r).norm();
      if (n > 1e-12) {
        gscale_[j][r] = 1.0 / n;
        gs_[j].row(r) /= n;
        bs_[j][r] /= n;
      }
    }
    hs_[j] = at.H;
    ds_[j] = at.d;
    hscale_[j] = Eigen::VectorXd::Ones(at.H.rows());
    for (int r = 0; r < at.H.rows(); ++r) {
      const double n = at.H.row(r).norm();
      if (n > 1e-12) {
        hscale_[j][r] = 1.0 / n;
        hs_[j].row(r) /= n;
        ds_[j][r] /= n;
      }
    }
    // Local system matrix is iteration-independent: factor once. The
    // coordination entries carry a doubled weight: the Jacobi sweep sees
    // stale neighbour values, and the majorized proximal form (anchored at
    // the previous iterate) is what keeps the consensus from ping-ponging.
    Eigen::MatrixXd k = at.M;
    k += pen_ * (gs_[j].transpose() * gs_[j]).eval();
    Eigen::VectorXd bdiag = Eigen::VectorXd::Zero(nv);
    for (const Atom::BEntry& be : at.b_entries) bdiag[be.local_var] += 2.0;
    k += pen_ * bdiag.asDiagonal().toDenseMatrix();
    k.diagonal().array() += 1.0 / rho_;
    factor_[j].compute(k);
    if (factor_[j].info() != Eigen::Success)
      throw SolverError("pac: singular local system at atom " + std::to_string(j));
  }

  // Uzawa step for the local inequality sweeps: a power estimate of
  // lambda_max(H K^-1 H') bounds the stable step from above.
  uzawa_step_.assign(natoms, 1.0);
  for (int j = 0; j < natoms; ++j) {
    const int mh = static_cast<int>(hs_[j].rows());
    if (mh == 0) continue;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(mh) / std::sqrt(double(mh));
    double eig = 1.0;
    for (int it = 0; it < 25; ++it) {
      Eigen::VectorXd w = hs_[j] * factor_[j].solve(hs_[j].transpose() * v);
      eig = w.norm();
      if (eig <= 1e-14) break;
      v = w / eig;
    }
    uzawa_step_[j] = eig > 1e-12 ? 1.0 / eig : 1.0;
  }
}

void PacSolver::step() {
  const int natoms = static_cast<int>(sys_.atoms.size());
  x_ext_prev_ = x_ext_;

  // Coordination residuals at the previous synchronization; the cross part
  // of the augmented term uses the neighbour's communicated value.
  Eigen::VectorXd bx_prev(sys_.graph.rows.size());
  for (size_t r = 0; r < sys_.graph.rows.size(); ++r)
    bx_prev[r] = x_ext_[sys_.graph.rows[r].est_var] -
                 x_ext_[sys_.graph.rows[r].owner_var];

  // (a)-(d): local primal update, lambda projected ascent, mu + extrapolation.
  parallel_for(natoms, cfg_.workers, [&](int j) {
    const Atom& at = sys_.atoms[j];
    Eigen::VectorXd rhs_base = at.c;
    if (at.G.rows()) rhs_base += gs_[j].transpose() * (mubar_[j] - pen_ * bs_[j]);
    for (const Atom::BEntry& be : at.b_entries) {
      rhs_base[be.local_var] += be.coef * nubar_[be.row];
      // coef^2 = 1: the stale-neighbour part of B'(Bx) is coef*bx - a_prev,
      // and the majorizer anchors another pen * a_prev.
      rhs_base[be.local_var] +=
          pen_ * (be.coef * bx_prev[be.row] - 2.0 * a_[j][be.local_var]);
    }
    rhs_base -= a_[j] / rho_;

    // (a) + (b): sweep the regularized solve and the projected ascent until
    // the local primal/multiplier pair settles for this round's duals.
    const int sweeps = std::max(1, cfg_.inner_sweeps);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      Eigen::VectorXd rhs = rhs_base;
      if (at.H.rows()) rhs += hs_[j].transpose() * lambda_[j];
      a_[j] = factor_[j].solve(-rhs);
      if (!at.H.rows()) break;
      const Eigen::VectorXd viol = hs_[j] * a_[j] - ds_[j];
      Eigen::VectorXd next =
          (lambda_[j] + uzawa_step_[j] * viol).cwiseMax(0.0);
      const double change = (next - lambda_[j]).cwiseAbs().maxCoeff();
      lambda_[j] = next;
      if (change < 1e-12) break;
    }

    if (at.G.rows()) {
      const Eigen::VectorXd resid = gs_[j] * a_[j] - bs_[j];
      mu_[j] += rho_ * gamma_ * resid;
      mubar_[j] = mu_[j] + rho_ * gamma_ * resid;
    }
  });

  // (e): communicate primal values within the network.
  for (int j = 0; j < natoms; ++j) {
    const Atom& at = sys_.atoms[j];
    for (size_t i = 0; i < at.vars.size(); ++i) x_ext_[at.vars[i]] = a_[j][i];
  }

  // (f)-(g): coordination dual ascent with extrapolation on assigned rows.
  parallel_for(natoms, cfg_.workers, [&](int j) {
    for (int r : sys_.atoms[j].assigned_rows) {
      const auto& pr = sys_.graph.rows[r];
      const double resid = x_ext_[pr.est_var] - x_ext_[pr.owner_var];
      nu_[r] += rho_ * gamma_ * resid;
      nubar_[r] = nu_[r] + rho_ * gamma_ * resid;
    }
  });
  // (h): barred duals become visible to every atom at the next round.
  ++iter_;
}

PacResiduals PacSolver::residuals() const {
  PacResiduals out;
  for (size_t j = 0; j < sys_.atoms.size(); ++j) {
    const Atom& at = sys_.atoms[j];
    if (at.G.rows())
      out.eq = std::max(out.eq, (at.G * a_[j] - at.b).cwiseAbs().maxCoeff());
    if (at.H.rows())
      out.ineq = std::max(out.ineq, (at.H * a_[j] - at.d).maxCoeff());
  }
  out.ineq = std::max(out.ineq, 0.0);
  if (sys_.graph.B.rows())
    out.coord = (sys_.graph.B * x_ext_).cwiseAbs().maxCoeff();
  out.primal_change = (x_ext_ - x_ext_prev_).cwiseAbs().maxCoeff();
  return out;
}

double PacSolver::objective() const {
  Eigen::VectorXd x = x_ext_.head(sys_.n_original);
  return qp_.objective(x);
}

PrimalDualSolution PacSolver::assemble() const {
  PrimalDualSolution sol;
  sol.x = x_ext_.head(sys_.n_original);
  sol.mu = Eigen::VectorXd::Zero(qp_.G.rows());
  sol.lambda = Eigen::VectorXd::Zero(qp_.H.rows());
  for (size_t j = 0; j < sys_.atoms.size(); ++j) {
    const Atom& at = sys_.atoms[j];
    // Undo the row equilibration on the duals.
    for (size_t r = 0; r < at.eq_rows.size(); ++r)
      sol.mu[at.eq_rows[r]] = gscale_[j][r] * mu_[j][r];
    for (size_t r = 0; r < at.ineq_rows.size(); ++r)
      sol.lambda[at.ineq_rows[r]] = hscale_[j][r] * lambda_[j][r];
  }
  sol.nu = nu_;
  sol.iterations = iter_;
  sol.objective = qp_.objective(sol.x);
  const PacResiduals res = residuals();
  sol.eq_res = res.eq;
  sol.ineq_res = res.ineq;
  sol.coord_res = res.coord;
  return sol;
}

PrimalDualSolution pac_iterate(const AtomSystem& sys, const StandardFormQP& qp,
                               const PacConfig& cfg) {
  PacSolver solver(sys, qp, cfg);
  std::ofstream trace;
  if (!cfg.trace_path.empty()) {
    trace.open(cfg.trace_path);
    trace << "iteration,eq_res,coord_res,ineq_res,objective\n";
  }
  PacResiduals res;
  bool converged = false;
  while (solver.iterations() < cfg.max_iters) {
    solver.step();
    res = solver.residuals();
    if (trace.is_open() && (solver.iterations() % cfg.trace_every == 0 ||
                            solver.iterations() == 1)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%d,%.6e,%.6e,%.6e,%.10e",
                    solver.iterations(), res.eq, res.coord, res.ineq,
                    solver.objective());
      trace << buf << "\n";
    }
    if (res.eq < cfg.tol_feas && res.coord < cfg.tol_coord) {
      converged = true;
      break;
    }
  }
  PrimalDualSolution sol = solver.assemble();
  sol.status = converged ? SolveStatus::Optimal : SolveStatus::MaxIterations;
  if (!converged)
    sol.message = "pac: no convergence within " + std::to_string(cfg.max_iters) +
                  " iterations (eq " + std::to_string(res.eq) + ", coord " +
                  std::to_string(res.coord) + ")";
  return sol;
}

PacResiduals check_convergence(const AtomSystem& sys, const Eigen::VectorXd& x_ext) {
  PacResiduals out;
  for (const Atom& at : sys.atoms) {
    Eigen::VectorXd local(at.vars.size());
    for (size_t i = 0; i < at.vars.size(); ++i) local[i] = x_ext[at.vars[i]];
    if (at.G.rows())
      out.eq = std::max(out.eq, (at.G * local - at.b).cwiseAbs().maxCoeff());
    if (at.H.rows())
      out.ineq =
          std::max(out.ineq, std::max(0.0, (at.H * local - at.d).maxCoeff()));
  }
  if (sys.graph.B.rows())
    out.coord = (sys.graph.B * x_ext).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace dqm
