#include "dqm/market.hpp"

#include <cmath>

#include "dqm/atoms.hpp"

namespace dqm {

namespace {

/// Extracts the clearing record from a solved QP.
void extract(const NetworkModel& net, const DeviceSet& devices,
             const StandardFormQP& qp, const PrimalDualSolution& sol,
             ClearingResult* out) {
  const int n = net.num_buses();
  out->node.assign(n, {});
  const Eigen::VectorXd& x = sol.x;
  for (int j = 0; j < n; ++j) {
    for (Phase ph : kAllPhases) {
      const int p = phase_index(ph);
      if (!net.buses()[j].phases.has(ph)) continue;
      ClearingResult::NodePhase& np = out->node[j][p];
      np.present = true;
      const auto& nv = qp.nodal[j][p];
      np.p = x[nv[static_cast<int>(Sym::P)]];
      np.q = x[nv[static_cast<int>(Sym::Q)]];
      np.vr = x[nv[static_cast<int>(Sym::VR)]];
      np.vi = x[nv[static_cast<int>(Sym::VI)]];
      np.ir = x[nv[static_cast<int>(Sym::IR)]];
      np.ii = x[nv[static_cast<int>(Sym::II)]];
      np.p_true = np.vr * np.ir + np.vi * np.ii;
      np.q_true = -np.vr * np.ii + np.vi * np.ir;
      np.price_p = -sol.mu[qp.pdef_row(j, ph)];
      np.price_q = -sol.mu[qp.qdef_row(j, ph)];
    }
  }
  out->gen.assign(devices.generators.size(), {});
  out->pf_violation = 0.0;
  for (size_t g = 0; g < devices.generators.size(); ++g) {
    const Generator& gen = devices.generators[g];
    const double t = gen.pf_min < 1.0 ? std::tan(std::acos(gen.pf_min)) : 0.0;
    for (Phase ph : kAllPhases) {
      if (!gen.phases.has(ph)) continue;
      const int p = phase_index(ph);
      const double gp = x[qp.gen[g][p][0]];
      const double gq = x[qp.gen[g][p][1]];
      out->gen[g][p][0] = gp;
      out->gen[g][p][1] = gq;
      out->pf_violation = std::max(out->pf_violation, std::abs(gq) - t * gp);
    }
  }
  out->load.assign(devices.loads.size(), {});
  for (size_t l = 0; l < devices.loads.size(); ++l) {
    out->load[l][0] = x[qp.load[l][0]];
    out->load[l][1] = x[qp.load[l][1]];
  }
  out->cap.assign(net.cap_banks().size(), {});
  for (size_t cb = 0; cb < net.cap_banks().size(); ++cb)
    for (int p = 0; p < 3; ++p)
      out->cap[cb][p] = qp.cap[cb][p] >= 0 ? x[qp.cap[cb][p]] : 0.0;
  out->slack = {};
  for (int p = 0; p < 3; ++p)
    if (qp.slack[p][0] >= 0) {
      out->slack[p][0] = x[qp.slack[p][0]];
      out->slack[p][1] = x[qp.slack[p][1]];
    }

  // Losses from flow currents; balance residuals from the V-I products
  // (power balance is an algebraic identity of the physics rows).
  out->loss_p = 0;
  out->loss_q = 0;
  for (int e = 0; e < net.num_lines(); ++e) {
    const Line& ln = net.lines()[e];
    const PhaseMask lp = ln.phases();
    for (Phase ph : kAllPhases) {
      if (!lp.has(ph)) continue;
      const int p = phase_index(ph);
      for (Phase qh : kAllPhases) {
        if (!lp.has(qh)) continue;
        const int q = phase_index(qh);
        const double ifr_p = x[qp.flow[e][p][0]], ifi_p = x[qp.flow[e][p][1]];
        const double ifr_q = x[qp.flow[e][q][0]], ifi_q = x[qp.flow[e][q][1]];
        out->loss_p += ln.z(p, q).real() * (ifr_p * ifr_q + ifi_p * ifi_q);
        out->loss_q += ln.z(p, q).imag() * (ifr_p * ifr_q + ifi_p * ifi_q);
      }
    }
  }
  double sum_p = 0, sum_q = 0;
  for (int j = 0; j < n; ++j)
    for (int p = 0; p < 3; ++p) {
      sum_p += out->node[j][p].p_true;
      sum_q += out->node[j][p].q_true;
    }
  out->balance_p = std::abs(sum_p - out->loss_p);
  out->balance_q = std::abs(sum_q - out->loss_q);

  PqRecovery rec = recover_pq(qp, x, net);
  out->bilinear_gap = rec.max_gap;
  out->bilinear_rel_gap = rec.max_rel_gap;
  out->status = sol.status;
  out->iterations += sol.iterations;
}

PrimalDualSolution solve_qp(const NetworkModel& net, const StandardFormQP& qp,
                            const MarketOptions& opts, ClearingResult* res) {
  if (opts.method == SolveMethod::Pac) {
    AtomSystem sys = atomize(qp, net);
    PrimalDualSolution sol = pac_iterate(sys, qp, opts.pac);
    if (sol.status == SolveStatus::Optimal) return sol;
    res->pac_fell_back = true;
    res->pac_message = sol.message;
  }
  PrimalDualSolution sol = solve_centralized(qp, opts.solve);
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::MaxIterations)
    throw SolverError("period solve failed: " + std::string(status_name(sol.status)) +
                      (sol.message.empty() ? "" : " (" + sol.message + ")"));
  return sol;
}

}  // namespace

ClearingResult clear_period(const NetworkModel& net, const DeviceSet& devices,
                            const PeriodInput& input, const MarketOptions& opts) {
  ClearingResult res;
  res.day = input.day;
  res.slot = input.slot;
  res.duration_hours = input.duration_hours;
  res.lambda_p = input.lambda_p;

  BoundsOptions bopts = opts.bounds;
  bopts.slack_limit = opts.opf.slack_limit;
  NodalBounds bounds = tighten_bounds(net, devices, input, bopts);

  StandardFormQP qp = assemble_qp(net, devices, input, bounds, opts.opf);
  PrimalDualSolution sol = solve_qp(net, qp, opts, &res);
  extract(net, devices, qp, sol, &res);

  for (int pass = 0; pass < opts.refine_passes; ++pass) {
    if (res.bilinear_gap <= opts.gap_target) break;
    RefApoint at;
    const int n = net.num_buses();
    at.vr.assign(n, {});
    at.vi.assign(n, {});
    at.ir.assign(n, {});
    at.ii.assign(n, {});
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < 3; ++p) {
        at.vr[j][p] = res.node[j][p].vr;
        at.vi[j][p] = res.node[j][p].vi;
        at.ir[j][p] = res.node[j][p].ir;
        at.ii[j][p] = res.node[j][p].ii;
      }
    // A shrunken window can make the claimed dispatch infeasible (e.g. a
    // fixed demand falls outside the tighter envelope). Keep the incumbent
    // result in that case.
    const NodalBounds tighter =
        refine_around(bounds, at, opts.refine_shrink, opts.refine_floor);
    ClearingResult trial = res;
    try {
      const StandardFormQP qp2 = assemble_qp(net, devices, input, tighter, opts.opf);
      const PrimalDualSolution sol2 = solve_qp(net, qp2, opts, &trial);
      if (sol2.status != SolveStatus::Optimal) break;
      extract(net, devices, qp2, sol2, &trial);
    } catch (const SolverError&) {
      break;
    }
    trial.refine_passes_used = pass + 1;
    res = trial;
    bounds = tighter;
  }
  return res;
}

DailyDLMP compute_dlmp(const std::vector<ClearingResult>& day) {
  if (day.empty()) throw ValidationError("compute_dlmp: empty day");
  DailyDLMP out;
  out.day = day.front().day;
  const size_t n = day.front().node.size();
  out.nodes.assign(n, {});
  for (size_t j = 0; j < n; ++j) {
    DailyDLMP::Node& nd = out.nodes[j];
    double pay_q = 0, pay_p = 0, sum_mu_q = 0, sum_mu_p = 0;
    bool pos = false, neg = false;
    for (const ClearingResult& r : day) {
      // Node-level price: volume-weighted aggregate over phases, so that
      // price * volume reproduces the phase-level payout exactly.
      double qv = 0, pv = 0, qpay = 0, ppay = 0, mu_q_mean = 0, mu_p_mean = 0;
      int nph = 0;
      for (int p = 0; p < 3; ++p) {
        const auto& np = r.node[j][p];
        if (!np.present) continue;
        qv += np.q;
        pv += np.p;
        qpay += np.price_q * np.q;
        ppay += np.price_p * np.p;
        mu_q_mean += np.price_q;
        mu_p_mean += np.price_p;
        ++nph;
      }
      nd.q_volume += qv;
      nd.p_volume += pv;
      pay_q += qpay;
      pay_p += ppay;
      sum_mu_q += nph ? (qv != 0 ? qpay / qv : mu_q_mean / nph) : 0.0;
      sum_mu_p += nph ? (pv != 0 ? ppay / pv : mu_p_mean / nph) : 0.0;
      if (qv > 0) pos = true;
      if (qv < 0) neg = true;
    }
    nd.q_mixed_sign = pos && neg;
    if (nd.q_volume != 0.0) {
      nd.mu_q = pay_q / nd.q_volume;
    } else {
      nd.mu_q = sum_mu_q / static_cast<double>(day.size());
      nd.q_zero_volume = true;
    }
    nd.mu_p = nd.p_volume != 0.0 ? pay_p / nd.p_volume
                                 : sum_mu_p / static_cast<double>(day.size());
  }
  return out;
}

Settlement settle(const std::vector<ClearingResult>& day, const DailyDLMP& dlmp,
                  const DeviceSet& devices, const NetworkModel& net) {
  Settlement out;
  const double mva = net.base_kva_1ph() / 1000.0;  // phase quantities
  double ratio_sum = 0;
  int counted = 0;
  for (size_t g = 0; g < devices.generators.size(); ++g) {
    Settlement::GenRow row;
    row.id = devices.generators[g].id;
    row.bus = net.bus_index(devices.generators[g].bus);
    double q_vol = 0;  // p.u.-hours
    for (const ClearingResult& r : day) {
      for (int p = 0; p < 3; ++p) {
        row.revenue_p +=
            r.node[row.bus][p].price_p * r.gen[g][p][0] * mva * r.duration_hours;
        q_vol += r.gen[g][p][1] * r.duration_hours;
      }
    }
    row.revenue_q = dlmp.nodes[row.bus].mu_q * q_vol * mva;
    const double total = row.revenue_p + row.revenue_q;
    if (std::abs(total) < 1e-12) {
      row.excluded = true;
    } else {
      row.ratio = row.revenue_q / total;
      ratio_sum += row.ratio;
      ++counted;
    }
    out.gens.push_back(row);
  }
  out.q_revenue_ratio = counted ? ratio_sum / counted : 0.0;
  return out;
}

}  // namespace dqm
