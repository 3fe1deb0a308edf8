#include "dqm/opf.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace dqm {

namespace {

constexpr int kNodalSyms = 10;

struct Assembler {
  const NetworkModel& net;
  const DeviceSet& devices;
  const PeriodInput& input;
  const NodalBounds& bounds;
  const OpfOptions& opts;
  StandardFormQP qp;

  std::vector<Eigen::Triplet<double>> gt, ht, mt;
  std::vector<double> bv, dv;

  int add_var(Sym s, int idx, Phase ph, int bus) {
    qp.var_keys.push_back({s, idx, ph, bus});
    return qp.n++;
  }

  int add_eq(RowClass cls, int idx, Phase ph, bool imag = false) {
    qp.eq_keys.push_back({cls, idx, ph, imag});
    bv.push_back(0.0);
    return static_cast<int>(bv.size()) - 1;
  }

  int add_ineq(IneqClass cls) {
    qp.ineq_classes.push_back(cls);
    dv.push_back(0.0);
    return static_cast<int>(dv.size()) - 1;
  }

  void box_rows(int var, const Interval& iv, double tol) {
    if (var < 0) return;
    if (iv.width() <= tol) {
      // Degenerate box: pin the variable (keeps its dual readable).
      const int r = add_eq(RowClass::FixVar, 0, Phase::A);
      gt.emplace_back(r, var, 1.0);
      bv[r] = iv.mid();
      return;
    }
    const int hi = add_ineq(IneqClass::BoundHi);
    ht.emplace_back(hi, var, 1.0);
    dv[hi] = iv.hi;
    const int lo = add_ineq(IneqClass::BoundLo);
    ht.emplace_back(lo, var, -1.0);
    dv[lo] = -iv.lo;
  }

  void fix_var(int var, double value) {
    const int r = add_eq(RowClass::FixVar, 0, Phase::A);
    gt.emplace_back(r, var, 1.0);
    bv[r] = value;
  }

  void layout_vars() {
    const int n = net.num_buses();
    qp.nodal.assign(n, {});
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < 3; ++p)
        for (int s = 0; s < kNodalSyms; ++s)
          qp.nodal[j][p][s] = add_var(static_cast<Sym>(s), j, static_cast<Phase>(p), j);
    qp.flow.assign(net.num_lines(), {});
    for (int e = 0; e < net.num_lines(); ++e) {
      const int fbus = net.bus_index(net.lines()[e].from_bus);
      for (int p = 0; p < 3; ++p) {
        qp.flow[e][p][0] = add_var(Sym::IFR, e, static_cast<Phase>(p), fbus);
        qp.flow[e][p][1] = add_var(Sym::IFI, e, static_cast<Phase>(p), fbus);
      }
    }
    qp.gen.assign(devices.generators.size(), {{{-1, -1}, {-1, -1}, {-1, -1}}});
    for (size_t g = 0; g < devices.generators.size(); ++g) {
      const int gbus = net.bus_index(devices.generators[g].bus);
      for (Phase ph : kAllPhases)
        if (devices.generators[g].phases.has(ph)) {
          qp.gen[g][phase_index(ph)][0] = add_var(Sym::GenP, static_cast<int>(g), ph, gbus);
          qp.gen[g][phase_index(ph)][1] = add_var(Sym::GenQ, static_cast<int>(g), ph, gbus);
        }
    }
    qp.load.assign(devices.loads.size(), {-1, -1});
    for (size_t l = 0; l < devices.loads.size(); ++l) {
      const int lbus = net.bus_index(devices.loads[l].bus);
      qp.load[l][0] = add_var(Sym::LoadP, static_cast<int>(l), devices.loads[l].phase, lbus);
      qp.load[l][1] = add_var(Sym::LoadQ, static_cast<int>(l), devices.loads[l].phase, lbus);
    }
    qp.cap.assign(net.cap_banks().size(), {-1, -1, -1});
    for (size_t cb = 0; cb < net.cap_banks().size(); ++cb) {
      const int cbus = net.bus_index(net.cap_banks()[cb].bus);
      for (Phase ph : kAllPhases)
        if (net.cap_banks()[cb].q_max[phase_index(ph)] > 0)
          qp.cap[cb][phase_index(ph)] = add_var(Sym::CapQ, static_cast<int>(cb), ph, cbus);
    }
    qp.slack = {{{-1, -1}, {-1, -1}, {-1, -1}}};
    const Bus& sb = net.buses()[net.slack_index()];
    for (Phase ph : kAllPhases)
      if (sb.phases.has(ph)) {
        qp.slack[phase_index(ph)][0] =
            add_var(Sym::SlackP, net.slack_index(), ph, net.slack_index());
        qp.slack[phase_index(ph)][1] =
            add_var(Sym::SlackQ, net.slack_index(), ph, net.slack_index());
      }
  }

  void physics_rows() {
    const int s = net.slack_index();
    // Slack voltage pins: 1.0 p.u., balanced.
    for (Phase ph : kAllPhases) {
      const int p = phase_index(ph);
      if (!net.buses()[s].phases.has(ph)) continue;
      int r = add_eq(RowClass::PinV, s, ph, false);
      gt.emplace_back(r, qp.nodal[s][p][static_cast<int>(Sym::VR)], 1.0);
      bv[r] = phase_unit(ph).real();
      r = add_eq(RowClass::PinV, s, ph, true);
      gt.emplace_back(r, qp.nodal[s][p][static_cast<int>(Sym::VI)], 1.0);
      bv[r] = phase_unit(ph).imag();
    }
    // Absent bus-phases: every nodal variable fixed to zero.
    for (int j = 0; j < net.num_buses(); ++j)
      for (Phase ph : kAllPhases) {
        if (net.buses()[j].phases.has(ph)) continue;
        for (int sy = 0; sy < kNodalSyms; ++sy)
          fix_var(qp.nodal[j][phase_index(ph)][sy], 0.0);
      }
    // Branch Ohm rows and absent line-phase flows.
    for (int e = 0; e < net.num_lines(); ++e) {
      const Line& ln = net.lines()[e];
      const int fi = net.bus_index(ln.from_bus);
      const int ti = net.bus_index(ln.to_bus);
      const PhaseMask lp = ln.phases();
      for (Phase ph : kAllPhases) {
        const int p = phase_index(ph);
        if (!lp.has(ph)) {
          fix_var(qp.flow[e][p][0], 0.0);
          fix_var(qp.flow[e][p][1], 0.0);
          continue;
        }
        // V_from - V_to - sum_q (R IFR_q - X IFI_q) = 0 (real part)
        const int rr = add_eq(RowClass::Ohm, e, ph, false);
        gt.emplace_back(rr, qp.nodal[fi][p][static_cast<int>(Sym::VR)], 1.0);
        gt.emplace_back(rr, qp.nodal[ti][p][static_cast<int>(Sym::VR)], -1.0);
        const int ri = add_eq(RowClass::Ohm, e, ph, true);
        gt.emplace_back(ri, qp.nodal[fi][p][static_cast<int>(Sym::VI)], 1.0);
        gt.emplace_back(ri, qp.nodal[ti][p][static_cast<int>(Sym::VI)], -1.0);
        for (Phase qh : kAllPhases) {
          const int q = phase_index(qh);
          if (!lp.has(qh)) continue;
          const double R = ln.z(p, q).real();
          const double X = ln.z(p, q).imag();
          gt.emplace_back(rr, qp.flow[e][q][0], -R);
          gt.emplace_back(rr, qp.flow[e][q][1], +X);
          gt.emplace_back(ri, qp.flow[e][q][0], -X);
          gt.emplace_back(ri, qp.flow[e][q][1], -R);
        }
      }
    }
    // Nodal current balance I = A^T I_flow.
    for (int j = 0; j < net.num_buses(); ++j) {
      for (Phase ph : kAllPhases) {
        const int p = phase_index(ph);
        if (!net.buses()[j].phases.has(ph)) continue;
        const int rr = add_eq(RowClass::Kcl, j, ph, false);
        const int ri = add_eq(RowClass::Kcl, j, ph, true);
        gt.emplace_back(rr, qp.nodal[j][p][static_cast<int>(Sym::IR)], 1.0);
        gt.emplace_back(ri, qp.nodal[j][p][static_cast<int>(Sym::II)], 1.0);
        for (int e : net.lines_at()[j]) {
          if (!net.lines()[e].phases().has(ph)) continue;
          const double sign = net.bus_index(net.lines()[e].from_bus) == j ? -1.0 : 1.0;
          gt.emplace_back(rr, qp.flow[e][p][0], sign);
          gt.emplace_back(ri, qp.flow[e][p][1], sign);
        }
      }
    }
  }

  void mccormick_cell(int w, int x, int y, Interval bx, Interval by) {
    const double tol = opts.degenerate_tol;
    if (bx.width() <= tol && by.width() <= tol) {
      const int r = add_eq(RowClass::EnvEq, 0, Phase::A);
      gt.emplace_back(r, w, 1.0);
      bv[r] = bx.mid() * by.mid();
      return;
    }
    if (bx.width() <= tol) {  // w = x0 * y exactly
      const int r = add_eq(RowClass::EnvEq, 0, Phase::A);
      gt.emplace_back(r, w, 1.0);
      gt.emplace_back(r, y, -bx.mid());
      return;
    }
    if (by.width() <= tol) {  // w = y0 * x exactly
      const int r = add_eq(RowClass::EnvEq, 0, Phase::A);
      gt.emplace_back(r, w, 1.0);
      gt.emplace_back(r, x, -by.mid());
      return;
    }
    McCormickCell cell;
    cell.w = w;
    cell.x = x;
    cell.y = y;
    cell.xl = bx.lo;
    cell.xu = bx.hi;
    cell.yl = by.lo;
    cell.yu = by.hi;
    for (const EnvelopeRow& row : build_mccormick(cell)) {
      const int r = add_ineq(IneqClass::Envelope);
      ht.emplace_back(r, w, row.cw);
      ht.emplace_back(r, x, row.cx);
      ht.emplace_back(r, y, row.cy);
      dv[r] = row.rhs;
    }
  }

  void power_definition_rows() {
    const int n = net.num_buses();
    qp.def_row.assign(n, {{{-1, -1}, {-1, -1}, {-1, -1}}});
    const int s = net.slack_index();
    for (int j = 0; j < n; ++j) {
      const Bus& bus = net.buses()[j];
      for (Phase ph : kAllPhases) {
        const int p = phase_index(ph);
        if (!bus.phases.has(ph)) continue;
        const auto& nv = qp.nodal[j][p];
        const int vr = nv[static_cast<int>(Sym::VR)];
        const int vi = nv[static_cast<int>(Sym::VI)];
        const int ir = nv[static_cast<int>(Sym::IR)];
        const int ii = nv[static_cast<int>(Sym::II)];
        // The slack voltage is pinned; its cells degenerate to exact lines.
        Interval bvr = bounds.vr[j][p], bvi = bounds.vi[j][p];
        if (j == s) {
          bvr = Interval::point(phase_unit(ph).real());
          bvi = Interval::point(phase_unit(ph).imag());
        }
        mccormick_cell(nv[static_cast<int>(Sym::WVRIR)], vr, ir, bvr, bounds.ir[j][p]);
        mccormick_cell(nv[static_cast<int>(Sym::WVIII)], vi, ii, bvi, bounds.ii[j][p]);
        mccormick_cell(nv[static_cast<int>(Sym::WVRII)], vr, ii, bvr, bounds.ii[j][p]);
        mccormick_cell(nv[static_cast<int>(Sym::WVIIR)], vi, ir, bvi, bounds.ir[j][p]);
        // P = w_vr_ir + w_vi_ii ; Q = -w_vr_ii + w_vi_ir
        const int pr = add_eq(RowClass::PDef, j, ph);
        gt.emplace_back(pr, nv[static_cast<int>(Sym::P)], 1.0);
        gt.emplace_back(pr, nv[static_cast<int>(Sym::WVRIR)], -1.0);
        gt.emplace_back(pr, nv[static_cast<int>(Sym::WVIII)], -1.0);
        const int qr = add_eq(RowClass::QDef, j, ph);
        gt.emplace_back(qr, nv[static_cast<int>(Sym::Q)], 1.0);
        gt.emplace_back(qr, nv[static_cast<int>(Sym::WVRII)], 1.0);
        gt.emplace_back(qr, nv[static_cast<int>(Sym::WVIIR)], -1.0);
        qp.def_row[j][p][0] = pr;
        qp.def_row[j][p][1] = qr;
      }
    }
  }

  void device_rows() {
    const int n = net.num_buses();
    // Collect devices per bus-phase for the balance rows.
    std::vector<std::array<std::vector<int>, 3>> gens_at(n), loads_at(n), caps_at(n);
    for (size_t g = 0; g < devices.generators.size(); ++g)
      for (Phase ph : kAllPhases)
        if (devices.generators[g].phases.has(ph))
          gens_at[net.bus_index(devices.generators[g].bus)][phase_index(ph)]
              .push_back(static_cast<int>(g));
    for (size_t l = 0; l < devices.loads.size(); ++l)
      loads_at[net.bus_index(devices.loads[l].bus)][phase_index(devices.loads[l].phase)]
          .push_back(static_cast<int>(l));
    for (size_t cb = 0; cb < net.cap_banks().size(); ++cb)
      for (Phase ph : kAllPhases)
        if (net.cap_banks()[cb].q_max[phase_index(ph)] > 0)
          caps_at[net.bus_index(net.cap_banks()[cb].bus)][phase_index(ph)]
              .push_back(static_cast<int>(cb));

    const int s = net.slack_index();
    for (int j = 0; j < n; ++j) {
      for (Phase ph : kAllPhases) {
        const int p = phase_index(ph);
        if (!net.buses()[j].phases.has(ph)) continue;
        // P_j - sum gen - slack + sum load = 0
        const int rp = add_eq(RowClass::BalP, j, ph);
        gt.emplace_back(rp, qp.nodal[j][p][static_cast<int>(Sym::P)], 1.0);
        const int rq = add_eq(RowClass::BalQ, j, ph);
        gt.emplace_back(rq, qp.nodal[j][p][static_cast<int>(Sym::Q)], 1.0);
        for (int g : gens_at[j][p]) {
          gt.emplace_back(rp, qp.gen[g][p][0], -1.0);
          gt.emplace_back(rq, qp.gen[g][p][1], -1.0);
        }
        for (int l : loads_at[j][p]) {
          gt.emplace_back(rp, qp.load[l][0], 1.0);
          gt.emplace_back(rq, qp.load[l][1], 1.0);
        }
        for (int cb : caps_at[j][p])
          gt.emplace_back(rq, qp.cap[cb][p], -1.0);
        if (j == s) {
          gt.emplace_back(rp, qp.slack[p][0], -1.0);
          gt.emplace_back(rq, qp.slack[p][1], -1.0);
        }
      }
    }

    // Generator boxes and PF cone rows.
    for (size_t g = 0; g < devices.generators.size(); ++g) {
      const Generator& gen = devices.generators[g];
      const double avail = input.gen_avail[g];
      const double t = gen.pf_min < 1.0 ? std::tan(std::acos(gen.pf_min)) : 0.0;
      for (Phase ph : kAllPhases) {
        if (!gen.phases.has(ph)) continue;
        const int p = phase_index(ph);
        const double cap = avail * gen.p_max[p];
        box_rows(qp.gen[g][p][0],
                 Interval{std::min(gen.p_min[p], cap), cap}, opts.degenerate_tol);
        box_rows(qp.gen[g][p][1], Interval{gen.q_min[p], gen.q_max[p]},
                 opts.degenerate_tol);
        // Q <= t P  and  -Q <= t P  (tan(acos(-pf)) = -tan(acos(pf)))
        int r = add_ineq(IneqClass::PfCone);
        ht.emplace_back(r, qp.gen[g][p][1], 1.0);
        ht.emplace_back(r, qp.gen[g][p][0], -t);
        r = add_ineq(IneqClass::PfCone);
        ht.emplace_back(r, qp.gen[g][p][1], -1.0);
        ht.emplace_back(r, qp.gen[g][p][0], -t);
      }
    }

    // Loads: fixed demand pins or flexible boxes.
    for (size_t l = 0; l < devices.loads.size(); ++l) {
      const Load& ld = devices.loads[l];
      if (ld.flexible) {
        box_rows(qp.load[l][0], Interval{ld.p_lo, ld.p_hi}, opts.degenerate_tol);
        box_rows(qp.load[l][1], Interval{ld.q_lo, ld.q_hi}, opts.degenerate_tol);
      } else {
        fix_var(qp.load[l][0], input.load_scale[l] * ld.p);
        fix_var(qp.load[l][1], input.load_scale[l] * ld.q);
      }
    }

    // Capacitor banks.
    for (size_t cb = 0; cb < net.cap_banks().size(); ++cb)
      for (int p = 0; p < 3; ++p)
        if (qp.cap[cb][p] >= 0)
          box_rows(qp.cap[cb][p], Interval{0.0, net.cap_banks()[cb].q_max[p]},
                   opts.degenerate_tol);

    // Slack import box.
    for (int p = 0; p < 3; ++p)
      if (qp.slack[p][0] >= 0) {
        box_rows(qp.slack[p][0], Interval{-opts.slack_limit, opts.slack_limit},
                 opts.degenerate_tol);
        box_rows(qp.slack[p][1], Interval{-opts.slack_limit, opts.slack_limit},
                 opts.degenerate_tol);
      }
  }

  void nodal_box_rows() {
    const int s = net.slack_index();
    for (int j = 0; j < net.num_buses(); ++j)
      for (Phase ph : kAllPhases) {
        const int p = phase_index(ph);
        if (!net.buses()[j].phases.has(ph)) continue;
        const auto& nv = qp.nodal[j][p];
        if (j != s) {  // slack V pinned by equality rows already
          box_rows(nv[static_cast<int>(Sym::VR)], bounds.vr[j][p], opts.degenerate_tol);
          box_rows(nv[static_cast<int>(Sym::VI)], bounds.vi[j][p], opts.degenerate_tol);
        }
        box_rows(nv[static_cast<int>(Sym::IR)], bounds.ir[j][p], opts.degenerate_tol);
        box_rows(nv[static_cast<int>(Sym::II)], bounds.ii[j][p], opts.degenerate_tol);
      }
    for (int e = 0; e < net.num_lines(); ++e)
      for (Phase ph : kAllPhases) {
        const int p = phase_index(ph);
        if (!net.lines()[e].phases().has(ph)) continue;
        box_rows(qp.flow[e][p][0], bounds.ifr[e][p], opts.degenerate_tol);
        box_rows(qp.flow[e][p][1], bounds.ifi[e][p], opts.degenerate_tol);
      }
  }

  void finish() {
    qp.c = Eigen::VectorXd::Zero(qp.n);
    assemble_objective(net, devices, input, opts, qp, &mt, &qp.c);
    qp.M.resize(qp.n, qp.n);
    qp.M.setFromTriplets(mt.begin(), mt.end());
    qp.G.resize(static_cast<int>(bv.size()), qp.n);
    qp.G.setFromTriplets(gt.begin(), gt.end());
    qp.b = Eigen::Map<Eigen::VectorXd>(bv.data(), bv.size());
    qp.H.resize(static_cast<int>(dv.size()), qp.n);
    qp.H.setFromTriplets(ht.begin(), ht.end());
    qp.d = Eigen::Map<Eigen::VectorXd>(dv.data(), dv.size());

    // PSD check: M is diagonal except the per-line 3x3 loss blocks.
    for (int k = 0; k < qp.M.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(qp.M, k); it; ++it)
        if (it.row() == it.col() && it.value() < -1e-12) {
          const VarKey& vk = qp.var_keys[it.row()];
          throw ValidationError(
              std::string("objective not PSD: negative diagonal ") +
              sym_name(vk.sym) + "[" + std::to_string(vk.idx) + "," +
              phase_label(vk.ph) + "] = " + std::to_string(it.value()) +
              " (disutility exceeds stabilizing terms)");
        }
    for (int e = 0; e < net.num_lines(); ++e) {
      Eigen::Matrix3d r = net.lines()[e].z.real();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (r + r.transpose()));
      if (es.eigenvalues().minCoeff() < -1e-9)
        throw ValidationError("objective not PSD: line " +
                              std::to_string(net.lines()[e].from_bus) + "-" +
                              std::to_string(net.lines()[e].to_bus) +
                              " resistance block has eigenvalue " +
                              std::to_string(es.eigenvalues().minCoeff()));
    }
  }
};

}  // namespace

void assemble_objective(const NetworkModel& net, const DeviceSet& devices,
                        const PeriodInput& input, const OpfOptions& opts,
                        const StandardFormQP& layout,
                        std::vector<Eigen::Triplet<double>>* m_triplets,
                        Eigen::VectorXd* c) {
  // Generator costs a^P P^2 + b^P P + a^Q Q^2 + b^Q Q.
  for (size_t g = 0; g < devices.generators.size(); ++g) {
    const Generator& gen = devices.generators[g];
    const double bq = gen.cost_q_lin >= 0 ? gen.cost_q_lin : 0.1 * gen.cost_p_lin;
    for (Phase ph : kAllPhases) {
      if (!gen.phases.has(ph)) continue;
      const int p = phase_index(ph);
      const int vp = layout.gen[g][p][0];
      const int vq = layout.gen[g][p][1];
      if (gen.cost_p_quad > 0) m_triplets->emplace_back(vp, vp, 2.0 * gen.cost_p_quad);
      if (gen.cost_q_quad > 0) m_triplets->emplace_back(vq, vq, 2.0 * gen.cost_q_quad);
      (*c)[vp] += gen.cost_p_lin;
      (*c)[vq] += bq;
    }
  }
  // Slack import at the wholesale price; reactive at one tenth of it.
  for (int p = 0; p < 3; ++p) {
    if (layout.slack[p][0] < 0) continue;
    (*c)[layout.slack[p][0]] += input.lambda_p;
    (*c)[layout.slack[p][1]] += 0.1 * input.lambda_p;
  }
  // Load disutility -alpha (P - P_lo)^2, concave; constant (dropped) for
  // inflexible loads. The cap keeps M PSD unless disabled.
  for (size_t l = 0; l < devices.loads.size(); ++l) {
    const Load& ld = devices.loads[l];
    if (!ld.flexible) continue;
    const double ap = opts.cap_disutility ? 0.0 : ld.alpha_p;
    const double aq = opts.cap_disutility ? 0.0 : ld.alpha_q;
    if (ap > 0) {
      m_triplets->emplace_back(layout.load[l][0], layout.load[l][0], -2.0 * ap);
      (*c)[layout.load[l][0]] += 2.0 * ap * ld.p_lo;
    }
    if (aq > 0) {
      m_triplets->emplace_back(layout.load[l][1], layout.load[l][1], -2.0 * aq);
      (*c)[layout.load[l][1]] += 2.0 * aq * ld.q_lo;
    }
  }
  // Line losses zeta * lambda_ref * sum_e (IFR' R IFR + IFI' R IFI).
  const double w = opts.zeta * opts.lambda_ref;
  if (w > 0) {
    for (int e = 0; e < net.num_lines(); ++e) {
      const Line& ln = net.lines()[e];
      const PhaseMask lp = ln.phases();
      for (Phase ph : kAllPhases) {
        if (!lp.has(ph)) continue;
        const int p = phase_index(ph);
        for (Phase qh : kAllPhases) {
          if (!lp.has(qh)) continue;
          const int q = phase_index(qh);
          const double r = ln.z(p, q).real();
          if (r == 0.0) continue;
          m_triplets->emplace_back(layout.flow[e][p][0], layout.flow[e][q][0], 2.0 * w * r);
          m_triplets->emplace_back(layout.flow[e][p][1], layout.flow[e][q][1], 2.0 * w * r);
        }
      }
    }
  }
}

StandardFormQP assemble_qp(const NetworkModel& net, const DeviceSet& devices,
                           const PeriodInput& input, const NodalBounds& bounds,
                           const OpfOptions& opts) {
  input.validate(devices);
  devices.validate(net);
  Assembler a{net, devices, input, bounds, opts, {}};
  a.layout_vars();
  a.physics_rows();
  a.power_definition_rows();
  a.device_rows();
  a.nodal_box_rows();
  a.finish();
  return std::move(a.qp);
}

PqRecovery recover_pq(const StandardFormQP& qp, const Eigen::VectorXd& x,
                      const NetworkModel& net) {
  PqRecovery out;
  // Gross apparent power per bus-phase from the device variables: the fair
  // scale at buses where generation offsets load and the net is near zero.
  std::vector<std::array<double, 3>> gross(
      net.num_buses(), {0.0, 0.0, 0.0});
  for (size_t g = 0; g < qp.gen.size(); ++g)
    for (int p = 0; p < 3; ++p)
      if (qp.gen[g][p][0] >= 0)
        gross[qp.var_keys[qp.gen[g][p][0]].bus][p] +=
            std::hypot(x[qp.gen[g][p][0]], x[qp.gen[g][p][1]]);
  for (size_t l = 0; l < qp.load.size(); ++l) {
    const VarKey& k = qp.var_keys[qp.load[l][0]];
    gross[k.bus][phase_index(k.ph)] += std::hypot(x[qp.load[l][0]], x[qp.load[l][1]]);
  }
  for (size_t cb = 0; cb < qp.cap.size(); ++cb)
    for (int p = 0; p < 3; ++p)
      if (qp.cap[cb][p] >= 0)
        gross[qp.var_keys[qp.cap[cb][p]].bus][p] += std::abs(x[qp.cap[cb][p]]);
  for (int p = 0; p < 3; ++p)
    if (qp.slack[p][0] >= 0)
      gross[net.slack_index()][p] += std::hypot(x[qp.slack[p][0]], x[qp.slack[p][1]]);

  for (int j = 0; j < net.num_buses(); ++j) {
    for (Phase ph : kAllPhases) {
      const int p = phase_index(ph);
      if (!net.buses()[j].phases.has(ph)) continue;
      const auto& nv = qp.nodal[j][p];
      PqRecovery::Entry e;
      e.bus = j;
      e.ph = ph;
      e.p = x[nv[static_cast<int>(Sym::P)]];
      e.q = x[nv[static_cast<int>(Sym::Q)]];
      const double vr = x[nv[static_cast<int>(Sym::VR)]];
      const double vi = x[nv[static_cast<int>(Sym::VI)]];
      const double ir = x[nv[static_cast<int>(Sym::IR)]];
      const double ii = x[nv[static_cast<int>(Sym::II)]];
      e.p_true = vr * ir + vi * ii;
      e.q_true = -vr * ii + vi * ir;
      e.gap_p = std::abs(e.p - e.p_true);
      e.gap_q = std::abs(e.q - e.q_true);
      e.apparent = std::max(std::hypot(e.p, e.q), gross[j][p]);
      out.max_gap = std::max({out.max_gap, e.gap_p, e.gap_q});
      out.max_rel_gap =
          std::max(out.max_rel_gap, std::max(e.gap_p, e.gap_q) /
                                        std::max(e.apparent, out.apparent_floor));
      out.entries.push_back(e);
    }
  }
  return out;
}

}  // namespace dqm
