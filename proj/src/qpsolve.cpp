#include "dqm/qpsolve.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

namespace dqm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* kStatusNames[] = {"optimal", "max_iterations", "infeasible",
                              "unbounded", "numerical_failure"};

/// Outcome of constraint preprocessing: variables pinned by single-entry
/// equality rows (and chains thereof) are eliminated; single-entry inequality
/// rows become variable bounds.
struct Presolved {
  int n_red = 0;
  std::vector<int> red_of_full;   // full var -> reduced index or -1
  std::vector<int> full_of_red;
  std::vector<double> fixed_val;  // full var -> value (valid when fixed)
  std::vector<bool> is_fixed;

  Eigen::SparseMatrix<double> M, G, H;  // reduced
  Eigen::VectorXd c, b, d;
  double offset = 0.0;
  Eigen::VectorXd lo, hi;  // reduced variable bounds (+-inf when absent)

  std::vector<int> eq_row_of_red;    // reduced G row -> full row
  std::vector<int> ineq_row_of_red;  // reduced H row -> full row
  /// (full G row, full var) in chronological elimination order.
  std::vector<std::pair<int, int>> elim;
  /// full H row -> (var, coef) for single-entry rows.
  std::vector<std::pair<int, double>> bound_row;  // (-1, 0) otherwise

  bool infeasible = false;
  std::string message;
};

Presolved presolve(const StandardFormQP& qp) {
  Presolved ps;
  const int n = qp.n;
  const int me = static_cast<int>(qp.G.rows());
  const int mi = static_cast<int>(qp.H.rows());
  ps.is_fixed.assign(n, false);
  ps.fixed_val.assign(n, 0.0);
  ps.bound_row.assign(mi, {-1, 0.0});

  // Row storage of G for the elimination sweep.
  std::vector<std::vector<std::pair<int, double>>> grows(me);
  {
    Eigen::SparseMatrix<double, Eigen::RowMajor> gr(qp.G);
    for (int r = 0; r < me; ++r)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gr, r); it; ++it)
        if (it.value() != 0.0) grows[r].emplace_back(it.col(), it.value());
  }
  std::vector<double> brem(qp.b.data(), qp.b.data() + me);
  std::vector<bool> row_done(me, false);
  std::vector<std::vector<int>> rows_of_var(n);
  for (int r = 0; r < me; ++r)
    for (auto& [v, a] : grows[r]) rows_of_var[v].push_back(r);
  std::vector<int> live_entries(me);
  for (int r = 0; r < me; ++r) live_entries[r] = static_cast<int>(grows[r].size());

  // Repeatedly eliminate single-live-entry equality rows.
  std::vector<int> queue;
  for (int r = 0; r < me; ++r)
    if (live_entries[r] <= 1) queue.push_back(r);
  while (!queue.empty()) {
    const int r = queue.back();
    queue.pop_back();
    if (row_done[r]) continue;
    int var = -1;
    double coef = 0.0;
    for (auto& [v, a] : grows[r])
      if (!ps.is_fixed[v]) {
        var = v;
        coef = a;
      }
    if (var < 0) {  // all entries fixed: consistency check
      double resid = brem[r];
      if (std::abs(resid) > 1e-7 * (1.0 + std::abs(qp.b[r]))) {
        ps.infeasible = true;
        ps.message = "presolve: equality row " + std::to_string(r) +
                     " inconsistent by " + std::to_string(resid);
        return ps;
      }
      row_done[r] = true;
      continue;
    }
    row_done[r] = true;
    const double value = brem[r] / coef;
    ps.is_fixed[var] = true;
    ps.fixed_val[var] = value;
    ps.elim.emplace_back(r, var);
    for (int r2 : rows_of_var[var]) {
      if (row_done[r2]) continue;
      for (auto& [v2, a2] : grows[r2])
        if (v2 == var) brem[r2] -= a2 * value;
      if (--live_entries[r2] <= 1) queue.push_back(r2);
    }
  }

  // Single-entry inequality rows become bounds on the free variables.
  std::vector<double> lo(n, -kInf), hi(n, kInf);
  std::vector<int> lo_row(n, -1), hi_row(n, -1);
  std::vector<std::vector<std::pair<int, double>>> hrows(mi);
  {
    Eigen::SparseMatrix<double, Eigen::RowMajor> hr(qp.H);
    for (int r = 0; r < mi; ++r)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(hr, r); it; ++it)
        if (it.value() != 0.0) hrows[r].emplace_back(it.col(), it.value());
  }
  std::vector<bool> h_is_bound(mi, false);
  for (int r = 0; r < mi; ++r) {
    if (hrows[r].size() != 1) continue;
    const auto [v, a] = hrows[r][0];
    h_is_bound[r] = true;
    ps.bound_row[r] = {v, a};
    if (ps.is_fixed[v]) {
      if (a * ps.fixed_val[v] > qp.d[r] + 1e-7 * (1.0 + std::abs(qp.d[r]))) {
        ps.infeasible = true;
        ps.message = "presolve: bound row " + std::to_string(r) +
                     " violated by fixed variable";
        return ps;
      }
      continue;
    }
    if (a > 0) {
      if (qp.d[r] / a < hi[v]) { hi[v] = qp.d[r] / a; hi_row[v] = r; }
    } else {
      if (qp.d[r] / a > lo[v]) { lo[v] = qp.d[r] / a; lo_row[v] = r; }
    }
  }
  for (int v = 0; v < n; ++v)
    if (!ps.is_fixed[v] && lo[v] > hi[v] + 1e-12) {
      ps.infeasible = true;
      ps.message = "presolve: variable " + std::to_string(v) +
                   " has empty bound interval [" + std::to_string(lo[v]) + ", " +
                   std::to_string(hi[v]) + "]";
      return ps;
    }

  // Reduced variable numbering.
  ps.red_of_full.assign(n, -1);
  for (int v = 0; v < n; ++v)
    if (!ps.is_fixed[v]) {
      ps.red_of_full[v] = ps.n_red++;
      ps.full_of_red.push_back(v);
    }

  // Reduced objective: c_red = c + M * x_fixed restricted to free vars.
  Eigen::VectorXd xfix = Eigen::VectorXd::Zero(n);
  for (int v = 0; v < n; ++v)
    if (ps.is_fixed[v]) xfix[v] = ps.fixed_val[v];
  Eigen::VectorXd cfull = qp.c + qp.M * xfix;
  ps.offset = 0.5 * xfix.dot(qp.M * xfix) + qp.c.dot(xfix);
  ps.c.resize(ps.n_red);
  ps.lo.resize(ps.n_red);
  ps.hi.resize(ps.n_red);
  for (int v = 0; v < n; ++v) {
    const int rv = ps.red_of_full[v];
    if (rv < 0) continue;
    ps.c[rv] = cfull[v];
    ps.lo[rv] = lo[v];
    ps.hi[rv] = hi[v];
  }
  std::vector<Eigen::Triplet<double>> mt;
  for (int k = 0; k < qp.M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(qp.M, k); it; ++it)
      if (!ps.is_fixed[it.row()] && !ps.is_fixed[it.col()])
        mt.emplace_back(ps.red_of_full[it.row()], ps.red_of_full[it.col()], it.value());
  ps.M.resize(ps.n_red, ps.n_red);
  ps.M.setFromTriplets(mt.begin(), mt.end());

  // Reduced equality system: live rows with their fixed entries moved to b.
  std::vector<Eigen::Triplet<double>> gt;
  std::vector<double> bred;
  for (int r = 0; r < me; ++r) {
    if (row_done[r]) continue;
    const int rr = static_cast<int>(bred.size());
    double rhs = qp.b[r];
    for (auto& [v, a] : grows[r]) {
      if (ps.is_fixed[v])
        rhs -= a * ps.fixed_val[v];
      else
        gt.emplace_back(rr, ps.red_of_full[v], a);
    }
    bred.push_back(rhs);
    ps.eq_row_of_red.push_back(r);
  }
  ps.G.resize(static_cast<int>(bred.size()), ps.n_red);
  ps.G.setFromTriplets(gt.begin(), gt.end());
  ps.b = Eigen::Map<Eigen::VectorXd>(bred.data(), bred.size());

  // Reduced inequality system: multi-entry rows only.
  std::vector<Eigen::Triplet<double>> ht;
  std::vector<double> dred;
  for (int r = 0; r < mi; ++r) {
    if (h_is_bound[r]) continue;
    double rhs = qp.d[r];
    int free_entries = 0;
    for (auto& [v, a] : hrows[r]) {
      if (ps.is_fixed[v])
        rhs -= a * ps.fixed_val[v];
      else
        ++free_entries;
    }
    if (free_entries == 0) {
      if (rhs < -1e-7 * (1.0 + std::abs(qp.d[r]))) {
        ps.infeasible = true;
        ps.message = "presolve: inequality row " + std::to_string(r) +
                     " violated by fixed variables";
        return ps;
      }
      continue;
    }
    const int rr = static_cast<int>(dred.size());
    for (auto& [v, a] : hrows[r])
      if (!ps.is_fixed[v]) ht.emplace_back(rr, ps.red_of_full[v], a);
    dred.push_back(rhs);
    ps.ineq_row_of_red.push_back(r);
  }
  ps.H.resize(static_cast<int>(dred.size()), ps.n_red);
  ps.H.setFromTriplets(ht.begin(), ht.end());
  ps.d = Eigen::Map<Eigen::VectorXd>(dred.data(), dred.size());

  return ps;
}

/// Mehrotra predictor-corrector on the reduced problem.
struct IpmResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x, y, z, zl, zu;
  int iterations = 0;
  std::vector<double> history;
  std::string message;
};

IpmResult run_ipm(const Presolved& ps, const SolveOptions& opts) {
  IpmResult out;
  const int n = ps.n_red;
  const int me = static_cast<int>(ps.G.rows());
  const int mi = static_cast<int>(ps.H.rows());

  std::vector<int> lset, uset;  // vars with finite bounds
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(ps.lo[i])) lset.push_back(i);
    if (std::isfinite(ps.hi[i])) uset.push_back(i);
  }
  const int nl = static_cast<int>(lset.size());
  const int nu = static_cast<int>(uset.size());

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(ps.lo[i]) && std::isfinite(ps.hi[i]))
      x[i] = 0.5 * (ps.lo[i] + ps.hi[i]);
    else if (std::isfinite(ps.lo[i]))
      x[i] = ps.lo[i] + 1.0;
    else if (std::isfinite(ps.hi[i]))
      x[i] = ps.hi[i] - 1.0;
  }
  Eigen::VectorXd s(mi), z(mi);
  for (int r = 0; r < mi; ++r) {
    s[r] = 1.0;
    z[r] = 1.0;
  }
  Eigen::VectorXd gl(nl), zl(nl), gu(nu), zu(nu);
  for (int k = 0; k < nl; ++k) {
    gl[k] = std::max(1.0, x[lset[k]] - ps.lo[lset[k]]);
    zl[k] = 1.0;
  }
  for (int k = 0; k < nu; ++k) {
    gu[k] = std::max(1.0, ps.hi[uset[k]] - x[uset[k]]);
    zu[k] = 1.0;
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(me);

  const int dim = n + me + mi;
  Eigen::SparseMatrix<double> kkt(dim, dim);
  // Assemble the pattern once (values refreshed each iteration).
  std::vector<Eigen::Triplet<double>> base;
  for (int k = 0; k < ps.M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(ps.M, k); it; ++it)
      if (it.row() >= it.col()) base.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < ps.G.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(ps.G, k); it; ++it)
      base.emplace_back(n + it.row(), it.col(), it.value());
  for (int k = 0; k < ps.H.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(ps.H, k); it; ++it)
      base.emplace_back(n + me + it.row(), it.col(), it.value());
  for (int i = 0; i < dim; ++i) base.emplace_back(i, i, 0.0);  // diagonal slots

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
  bool analyzed = false;

  const double cn = 1.0 + ps.c.lpNorm<Eigen::Infinity>();
  const double bn = 1.0 + (me ? ps.b.lpNorm<Eigen::Infinity>() : 0.0);
  const double dn = 1.0 + (mi ? ps.d.lpNorm<Eigen::Infinity>() : 0.0);

  double reg = opts.reg;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    // Residuals.
    Eigen::VectorXd rd = ps.M * x + ps.c + ps.G.transpose() * y + ps.H.transpose() * z;
    for (int k = 0; k < nl; ++k) rd[lset[k]] -= zl[k];
    for (int k = 0; k < nu; ++k) rd[uset[k]] += zu[k];
    Eigen::VectorXd re = ps.G * x - ps.b;
    Eigen::VectorXd ri = ps.H * x + s - ps.d;
    Eigen::VectorXd rgl(nl), rgu(nu);
    for (int k = 0; k < nl; ++k) rgl[k] = x[lset[k]] - ps.lo[lset[k]] - gl[k];
    for (int k = 0; k < nu; ++k) rgu[k] = ps.hi[uset[k]] - x[uset[k]] - gu[k];

    const double ncomp = mi + nl + nu;
    const double mu = ncomp > 0
                          ? (s.dot(z) + gl.dot(zl) + gu.dot(zu)) / ncomp
                          : 0.0;
    const double res = std::max({rd.lpNorm<Eigen::Infinity>() / cn,
                                 me ? re.lpNorm<Eigen::Infinity>() / bn : 0.0,
                                 mi ? ri.lpNorm<Eigen::Infinity>() / dn : 0.0,
                                 nl ? rgl.lpNorm<Eigen::Infinity>() : 0.0,
                                 nu ? rgu.lpNorm<Eigen::Infinity>() : 0.0, mu});
    if (opts.collect_history) out.history.push_back(res);
    if (res < opts.tol) {
      out.status = SolveStatus::Optimal;
      out.iterations = iter;
      out.x = x;
      out.y = y;
      out.z = z;
      out.zl = zl;
      out.zu = zu;
      return out;
    }
    if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e12) {
      out.status = SolveStatus::Unbounded;
      out.message = "iterates diverged";
      break;
    }

    // KKT matrix values for this iteration.
    Eigen::VectorXd dx_diag = Eigen::VectorXd::Constant(n, reg);
    for (int k = 0; k < nl; ++k) dx_diag[lset[k]] += zl[k] / gl[k];
    for (int k = 0; k < nu; ++k) dx_diag[uset[k]] += zu[k] / gu[k];
    std::vector<Eigen::Triplet<double>> trip = base;
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, dx_diag[i]);
    for (int r = 0; r < me; ++r) trip.emplace_back(n + r, n + r, -reg);
    for (int r = 0; r < mi; ++r)
      trip.emplace_back(n + me + r, n + me + r, -(s[r] / z[r] + reg));
    kkt.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      ldlt.analyzePattern(kkt);
      analyzed = true;
    }
    ldlt.factorize(kkt);
    if (ldlt.info() != Eigen::Success) {
      reg *= 100.0;
      if (reg > 1e-2) {
        out.status = SolveStatus::NumericalFailure;
        out.message = "KKT factorization failed";
        break;
      }
      --iter;
      continue;
    }

    auto solve_step = [&](const Eigen::VectorXd& rc_s, const Eigen::VectorXd& rc_l,
                          const Eigen::VectorXd& rc_u) {
      // Fold the bound/complementarity right-hand sides into the x and z blocks.
      Eigen::VectorXd rhs(dim);
      Eigen::VectorXd rdm = rd;
      for (int k = 0; k < nl; ++k)
        rdm[lset[k]] += (rc_l[k] + zl[k] * rgl[k]) / gl[k];
      for (int k = 0; k < nu; ++k)
        rdm[uset[k]] -= (rc_u[k] + zu[k] * rgu[k]) / gu[k];
      rhs.segment(0, n) = -rdm;
      rhs.segment(n, me) = -re;
      for (int r = 0; r < mi; ++r)
        rhs[n + me + r] = -ri[r] + rc_s[r] / z[r];
      Eigen::VectorXd sol = ldlt.solve(rhs);
      return sol;
    };

    // Predictor (affine) step.
    Eigen::VectorXd rc_s(mi), rc_l(nl), rc_u(nu);
    for (int r = 0; r < mi; ++r) rc_s[r] = s[r] * z[r];
    for (int k = 0; k < nl; ++k) rc_l[k] = gl[k] * zl[k];
    for (int k = 0; k < nu; ++k) rc_u[k] = gu[k] * zu[k];
    Eigen::VectorXd aff = solve_step(rc_s, rc_l, rc_u);
    auto expand = [&](const Eigen::VectorXd& sol, Eigen::VectorXd& dx,
                      Eigen::VectorXd& dy, Eigen::VectorXd& dz,
                      Eigen::VectorXd& ds, Eigen::VectorXd& dgl,
                      Eigen::VectorXd& dzl, Eigen::VectorXd& dgu,
                      Eigen::VectorXd& dzu, const Eigen::VectorXd& rcs,
                      const Eigen::VectorXd& rcl, const Eigen::VectorXd& rcu) {
      dx = sol.segment(0, n);
      dy = sol.segment(n, me);
      dz = sol.segment(n + me, mi);
      ds.resize(mi);
      for (int r = 0; r < mi; ++r) ds[r] = -(rcs[r] + s[r] * dz[r]) / z[r];
      dgl.resize(nl);
      dzl.resize(nl);
      for (int k = 0; k < nl; ++k) {
        dgl[k] = dx[lset[k]] + rgl[k];
        dzl[k] = -(rcl[k] + zl[k] * dgl[k]) / gl[k];
      }
      dgu.resize(nu);
      dzu.resize(nu);
      for (int k = 0; k < nu; ++k) {
        dgu[k] = -dx[uset[k]] + rgu[k];
        dzu[k] = -(rcu[k] + zu[k] * dgu[k]) / gu[k];
      }
    };
    Eigen::VectorXd dx, dy, dz, ds, dgl, dzl, dgu, dzu;
    expand(aff, dx, dy, dz, ds, dgl, dzl, dgu, dzu, rc_s, rc_l, rc_u);

    auto max_step = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
      double a = 1.0;
      for (int i = 0; i < v.size(); ++i)
        if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
      return a;
    };
    const double ap_aff = std::min({max_step(s, ds), max_step(gl, dgl), max_step(gu, dgu)});
    const double ad_aff = std::min({max_step(z, dz), max_step(zl, dzl), max_step(zu, dzu)});
    double mu_aff = 0.0;
    if (ncomp > 0) {
      mu_aff = ((s + ap_aff * ds).dot(z + ad_aff * dz) +
                (gl + ap_aff * dgl).dot(zl + ad_aff * dzl) +
                (gu + ap_aff * dgu).dot(zu + ad_aff * dzu)) /
               ncomp;
    }
    const double sigma =
        mu > 0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0) : 0.0;

    // Corrector step.
    for (int r = 0; r < mi; ++r) rc_s[r] = s[r] * z[r] + ds[r] * dz[r] - sigma * mu;
    for (int k = 0; k < nl; ++k) rc_l[k] = gl[k] * zl[k] + dgl[k] * dzl[k] - sigma * mu;
    for (int k = 0; k < nu; ++k) rc_u[k] = gu[k] * zu[k] + dgu[k] * dzu[k] - sigma * mu;
    Eigen::VectorXd cor = solve_step(rc_s, rc_l, rc_u);
    expand(cor, dx, dy, dz, ds, dgl, dzl, dgu, dzu, rc_s, rc_l, rc_u);

    const double frac = 0.995;
    const double ap = frac * std::min({max_step(s, ds), max_step(gl, dgl), max_step(gu, dgu)});
    const double ad = frac * std::min({max_step(z, dz), max_step(zl, dzl), max_step(zu, dzu)});

    x += ap * dx;
    s += ap * ds;
    gl += ap * dgl;
    gu += ap * dgu;
    y += ad * dy;
    z += ad * dz;
    zl += ad * dzl;
    zu += ad * dzu;
    out.iterations = iter + 1;
  }

  if (out.status == SolveStatus::NumericalFailure && out.message.empty()) {
    out.status = SolveStatus::MaxIterations;
    out.message = "no convergence within max_iters";
  }
  out.x = x;
  out.y = y;
  out.z = z;
  out.zl = zl;
  out.zu = zu;
  return out;
}

}  // namespace

const char* status_name(SolveStatus s) { return kStatusNames[static_cast<int>(s)]; }

PrimalDualSolution solve_centralized(const StandardFormQP& qp,
                                     const SolveOptions& opts) {
  PrimalDualSolution sol;
  Presolved ps = presolve(qp);
  if (ps.infeasible) {
    sol.status = SolveStatus::Infeasible;
    sol.message = ps.message;
    return sol;
  }

  IpmResult ipm = run_ipm(ps, opts);
  sol.status = ipm.status;
  sol.iterations = ipm.iterations;
  sol.message = ipm.message;
  sol.residual_history = std::move(ipm.history);
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::MaxIterations)
    return sol;

  // Postsolve: full primal.
  const int n = qp.n;
  sol.x.resize(n);
  for (int v = 0; v < n; ++v)
    sol.x[v] = ps.is_fixed[v] ? ps.fixed_val[v] : ipm.x[ps.red_of_full[v]];

  // Inequality duals: IPM rows, then bound rows mapped back per variable.
  const int mi = static_cast<int>(qp.H.rows());
  sol.lambda = Eigen::VectorXd::Zero(mi);
  for (size_t rr = 0; rr < ps.ineq_row_of_red.size(); ++rr)
    sol.lambda[ps.ineq_row_of_red[rr]] = ipm.z[rr];
  // For each reduced var with finite bounds, credit its multiplier to the
  // tightest single-entry row on that side.
  {
    std::vector<int> lrow(ps.n_red, -1), urow(ps.n_red, -1);
    std::vector<double> lcoef(ps.n_red, 0), ucoef(ps.n_red, 0);
    std::vector<double> lbest(ps.n_red, -kInf), ubest(ps.n_red, kInf);
    for (int r = 0; r < mi; ++r) {
      const auto [v, a] = ps.bound_row[r];
      if (v < 0 || ps.is_fixed[v]) continue;
      const int rv = ps.red_of_full[v];
      const double bound = qp.d[r] / a;
      if (a > 0) {
        if (bound < ubest[rv]) { ubest[rv] = bound; urow[rv] = r; ucoef[rv] = a; }
      } else {
        if (bound > lbest[rv]) { lbest[rv] = bound; lrow[rv] = r; lcoef[rv] = a; }
      }
    }
    int kl = 0, ku = 0;
    for (int i = 0; i < ps.n_red; ++i) {
      if (std::isfinite(ps.lo[i])) {
        if (lrow[i] >= 0) sol.lambda[lrow[i]] = ipm.zl[kl] / (-lcoef[i]);
        ++kl;
      }
      if (std::isfinite(ps.hi[i])) {
        if (urow[i] >= 0) sol.lambda[urow[i]] = ipm.zu[ku] / ucoef[i];
        ++ku;
      }
    }
  }

  // Equality duals: IPM rows, then back-substitution for eliminated rows.
  const int me = static_cast<int>(qp.G.rows());
  sol.mu = Eigen::VectorXd::Zero(me);
  for (size_t rr = 0; rr < ps.eq_row_of_red.size(); ++rr)
    sol.mu[ps.eq_row_of_red[rr]] = ipm.y[rr];
  {
    Eigen::VectorXd rho = qp.M * sol.x + qp.c + qp.G.transpose() * sol.mu +
                          qp.H.transpose() * sol.lambda;
    Eigen::SparseMatrix<double, Eigen::RowMajor> gr(qp.G);
    for (auto it = ps.elim.rbegin(); it != ps.elim.rend(); ++it) {
      const auto [row, var] = *it;
      double avar = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator e(gr, row); e; ++e)
        if (e.col() == var) avar = e.value();
      const double mu_r = -rho[var] / avar;
      sol.mu[row] = mu_r;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator e(gr, row); e; ++e)
        rho[e.col()] += mu_r * e.value();
    }
  }

  sol.objective = qp.objective(sol.x);
  const KktResiduals kk = check_kkt(qp, sol.x, sol.mu, sol.lambda);
  sol.stat_res = kk.stationarity;
  sol.eq_res = kk.eq;
  sol.ineq_res = kk.ineq;
  sol.comp_res = kk.comp;
  return sol;
}

KktResiduals check_kkt(const StandardFormQP& qp, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& mu, const Eigen::VectorXd& lambda) {
  KktResiduals out;
  Eigen::VectorXd stat = qp.M * x + qp.c;
  if (qp.G.rows()) stat += qp.G.transpose() * mu;
  if (qp.H.rows()) stat += qp.H.transpose() * lambda;
  const double scale = 1.0 + qp.c.lpNorm<Eigen::Infinity>();
  out.stationarity = stat.lpNorm<Eigen::Infinity>() / scale;
  out.eq = qp.eq_residual(x);
  out.ineq = qp.ineq_residual(x);
  if (qp.H.rows()) {
    Eigen::VectorXd slack = qp.d - qp.H * x;
    out.comp = (lambda.array() * slack.array()).abs().maxCoeff();
    out.lambda_min = lambda.minCoeff();
  }
  return out;
}

}  // namespace dqm
