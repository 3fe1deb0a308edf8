#include "dqm/bounds.hpp"

#include <cmath>
#include <numbers>

namespace dqm {

namespace {

Interval meet_or_throw(const Interval& a, const Interval& b, const NetworkModel& net,
                       int bus_idx, Phase ph, const char* what) {
  auto m = a.meet(b);
  if (!m)
    throw SolverError(std::string("infeasible instance: empty ") + what +
                      " interval at bus " +
                      std::to_string(net.buses()[bus_idx].id) + " phase " +
                      std::string(1, phase_label(ph)));
  return *m;
}

}  // namespace

void net_injection_intervals(const NetworkModel& net, const DeviceSet& devices,
                             const PeriodInput& input, double slack_limit,
                             std::vector<std::array<Interval, 3>>* p_net,
                             std::vector<std::array<Interval, 3>>* q_net) {
  const int n = net.num_buses();
  p_net->assign(n, {Interval{0, 0}, Interval{0, 0}, Interval{0, 0}});
  q_net->assign(n, {Interval{0, 0}, Interval{0, 0}, Interval{0, 0}});
  for (size_t gi = 0; gi < devices.generators.size(); ++gi) {
    const Generator& g = devices.generators[gi];
    const int j = net.bus_index(g.bus);
    const double avail = input.gen_avail[gi];
    const double t = g.pf_min < 1.0 ? std::tan(std::acos(g.pf_min)) : 0.0;
    for (Phase ph : kAllPhases) {
      if (!g.phases.has(ph)) continue;
      const int p = phase_index(ph);
      const double cap = avail * g.p_max[p];
      const Interval pg{std::min(g.p_min[p], cap), cap};
      Interval qg{g.q_min[p], g.q_max[p]};
      // PF cone implies |Q| <= t * P <= t * cap.
      qg = qg.meet(Interval{-t * cap, t * cap}).value_or(Interval{0, 0});
      (*p_net)[j][p] = (*p_net)[j][p] + pg;
      (*q_net)[j][p] = (*q_net)[j][p] + qg;
    }
  }
  for (size_t li = 0; li < devices.loads.size(); ++li) {
    const Load& l = devices.loads[li];
    const int j = net.bus_index(l.bus);
    const int p = phase_index(l.phase);
    Interval pl, ql;
    if (l.flexible) {
      pl = Interval{l.p_lo, l.p_hi};
      ql = Interval{l.q_lo, l.q_hi};
    } else {
      pl = Interval::point(input.load_scale[li] * l.p);
      ql = Interval::point(input.load_scale[li] * l.q);
    }
    (*p_net)[j][p] = (*p_net)[j][p] - pl;  // consumption
    (*q_net)[j][p] = (*q_net)[j][p] - ql;
  }
  for (const CapacitorBank& cb : net.cap_banks()) {
    const int j = net.bus_index(cb.bus);
    for (int p = 0; p < 3; ++p)
      (*q_net)[j][p] = (*q_net)[j][p] + Interval{0, cb.q_max[p]};
  }
  const int s = net.slack_index();
  for (Phase ph : kAllPhases) {
    if (!net.buses()[s].phases.has(ph)) continue;
    const int p = phase_index(ph);
    (*p_net)[s][p] = (*p_net)[s][p] + Interval{-slack_limit, slack_limit};
    (*q_net)[s][p] = (*q_net)[s][p] + Interval{-slack_limit, slack_limit};
  }
}

NodalBounds tighten_bounds(const NetworkModel& net, const DeviceSet& devices,
                           const PeriodInput& input, int rounds,
                           const BoundsOptions& opts) {
  if (rounds < 1) throw ValidationError("tighten_bounds: rounds must be >= 1");
  const int n = net.num_buses();
  const int ne = net.num_lines();
  const double delta = opts.angle_halfwidth_deg * std::numbers::pi / 180.0;

  NodalBounds b;
  b.vr.assign(n, {});
  b.vi.assign(n, {});
  b.ir.assign(n, {Interval{0, 0}, Interval{0, 0}, Interval{0, 0}});
  b.ii.assign(n, {Interval{0, 0}, Interval{0, 0}, Interval{0, 0}});
  b.ifr.assign(ne, {Interval{0, 0}, Interval{0, 0}, Interval{0, 0}});
  b.ifi.assign(ne, {Interval{0, 0}, Interval{0, 0}, Interval{0, 0}});

  // Voltage boxes from the magnitude limits over the angle sector.
  for (int j = 0; j < n; ++j) {
    const Bus& bus = net.buses()[j];
    for (Phase ph : kAllPhases) {
      const int p = phase_index(ph);
      if (!bus.phases.has(ph)) {
        b.vr[j][p] = b.vi[j][p] = Interval{0, 0};
        continue;
      }
      const double th = phase_angle(ph);
      b.vr[j][p] = sector_cos_range(bus.vmin, bus.vmax, th - delta, th + delta);
      b.vi[j][p] = sector_sin_range(bus.vmin, bus.vmax, th - delta, th + delta);
    }
  }

  net_injection_intervals(net, devices, input, opts.slack_limit, &b.p_net, &b.q_net);

  // Children lists for the radial subtree sums.
  const bool radial = net.is_radial();
  std::vector<std::vector<int>> child_lines(n);
  if (radial) {
    for (int j : net.bfs_order()) {
      const int e = net.parent_line()[j];
      if (e < 0) continue;
      const int parent = net.bus_index(net.lines()[e].from_bus) == j
                             ? net.bus_index(net.lines()[e].to_bus)
                             : net.bus_index(net.lines()[e].from_bus);
      child_lines[parent].push_back(e);
    }
  }

  for (int round = 0; round < rounds; ++round) {
    double change = 0.0;

    // Nodal currents by interval division I = (P - jQ) V / |V|^2.
    for (int j = 0; j < n; ++j) {
      const Bus& bus = net.buses()[j];
      for (Phase ph : kAllPhases) {
        const int p = phase_index(ph);
        if (!bus.phases.has(ph)) continue;
        const Interval& pn = b.p_net[j][p];
        const Interval& qn = b.q_net[j][p];
        const Interval v2{bus.vmin * bus.vmin, bus.vmax * bus.vmax};
        Interval ir = (pn * b.vr[j][p] + qn * b.vi[j][p]).div_pos(v2);
        Interval ii = (pn * b.vi[j][p] - qn * b.vr[j][p]).div_pos(v2);
        const double smax = std::hypot(pn.mag(), qn.mag());
        ir = ir.clamp_abs(smax / bus.vmin);
        ii = ii.clamp_abs(smax / bus.vmin);
        if (round == 0) {
          b.ir[j][p] = ir;
          b.ii[j][p] = ii;
        } else {
          Interval nr = meet_or_throw(b.ir[j][p], ir, net, j, ph, "current");
          Interval ni = meet_or_throw(b.ii[j][p], ii, net, j, ph, "current");
          change = std::max({change, b.ir[j][p].lo - nr.lo, nr.hi - b.ir[j][p].hi,
                             std::abs(b.ir[j][p].width() - nr.width())});
          b.ir[j][p] = nr;
          b.ii[j][p] = ni;
        }
      }
    }

    if (radial) {
      // Flow intervals: reverse BFS accumulation of subtree injections.
      std::vector<std::array<Interval, 3>> acc_r = b.ir, acc_i = b.ii;
      const auto& order = net.bfs_order();
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const int j = *it;
        const int e = net.parent_line()[j];
        if (e < 0) continue;
        const Line& ln = net.lines()[e];
        const bool j_is_to = net.bus_index(ln.to_bus) == j;
        const int parent = j_is_to ? net.bus_index(ln.from_bus) : net.bus_index(ln.to_bus);
        const PhaseMask lp = ln.phases();
        for (Phase ph : kAllPhases) {
          const int p = phase_index(ph);
          if (!lp.has(ph)) continue;
          // Flow oriented from -> to carries minus the subtree net injection.
          Interval fr = -acc_r[j][p];
          Interval fi = -acc_i[j][p];
          if (!j_is_to) {
            fr = -fr;
            fi = -fi;
          }
          const double amp = ln.ampacity[p];
          if (amp > 0) {
            fr = fr.clamp_abs(amp);
            fi = fi.clamp_abs(amp);
            if (!fr.valid() || !fi.valid())
              throw SolverError(
                  "infeasible instance: ampacity of line " +
                  std::to_string(ln.from_bus) + "-" + std::to_string(ln.to_bus) +
                  " cannot carry the load at bus " +
                  std::to_string(net.buses()[j].id) + " phase " +
                  std::string(1, phase_label(ph)));
          }
          b.ifr[e][p] = fr;
          b.ifi[e][p] = fi;
          acc_r[parent][p] = acc_r[parent][p] + acc_r[j][p];
          acc_i[parent][p] = acc_i[parent][p] + acc_i[j][p];
        }
      }

      // Backward KCL: nodal current must equal the incident flow sum.
      for (int j = 0; j < n; ++j) {
        for (Phase ph : kAllPhases) {
          const int p = phase_index(ph);
          if (!net.buses()[j].phases.has(ph)) continue;
          Interval sum_r{0, 0}, sum_i{0, 0};
          for (int e : net.lines_at()[j]) {
            if (!net.lines()[e].phases().has(ph)) continue;
            const bool outgoing = net.bus_index(net.lines()[e].from_bus) == j;
            sum_r = outgoing ? sum_r + b.ifr[e][p] : sum_r - b.ifr[e][p];
            sum_i = outgoing ? sum_i + b.ifi[e][p] : sum_i - b.ifi[e][p];
          }
          b.ir[j][p] = meet_or_throw(b.ir[j][p], sum_r, net, j, ph, "current");
          b.ii[j][p] = meet_or_throw(b.ii[j][p], sum_i, net, j, ph, "current");
        }
      }

      // Voltage update by interval Ohm's law walking out from the slack.
      for (int j : net.bfs_order()) {
        const int e = net.parent_line()[j];
        if (e < 0) continue;
        const Line& ln = net.lines()[e];
        const bool j_is_to = net.bus_index(ln.to_bus) == j;
        const int parent = j_is_to ? net.bus_index(ln.from_bus) : net.bus_index(ln.to_bus);
        const PhaseMask lp = ln.phases();
        for (Phase ph : kAllPhases) {
          const int p = phase_index(ph);
          if (!lp.has(ph)) continue;
          Interval dr{0, 0}, di{0, 0};
          for (Phase qh : kAllPhases) {
            const int q = phase_index(qh);
            if (!lp.has(qh)) continue;
            const double R = ln.z(p, q).real();
            const double X = ln.z(p, q).imag();
            dr = dr + R * b.ifr[e][q] - X * b.ifi[e][q];
            di = di + X * b.ifr[e][q] + R * b.ifi[e][q];
          }
          // V_to = V_from - drop; flipping when walking against orientation.
          Interval nvr = j_is_to ? b.vr[parent][p] - dr : b.vr[parent][p] + dr;
          Interval nvi = j_is_to ? b.vi[parent][p] - di : b.vi[parent][p] + di;
          Interval mr = meet_or_throw(b.vr[j][p], nvr, net, j, ph, "voltage");
          Interval mi = meet_or_throw(b.vi[j][p], nvi, net, j, ph, "voltage");
          change = std::max({change, b.vr[j][p].width() - mr.width(),
                             b.vi[j][p].width() - mi.width()});
          b.vr[j][p] = mr;
          b.vi[j][p] = mi;
        }
      }
    } else {
      // Meshed fallback: flows bounded by the total of nodal magnitudes.
      Interval tot_r{0, 0}, tot_i{0, 0};
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < 3; ++p) {
          tot_r = tot_r + Interval{-b.ir[j][p].mag(), b.ir[j][p].mag()};
          tot_i = tot_i + Interval{-b.ii[j][p].mag(), b.ii[j][p].mag()};
        }
      for (int e = 0; e < ne; ++e) {
        const PhaseMask lp = net.lines()[e].phases();
        for (Phase ph : kAllPhases) {
          const int p = phase_index(ph);
          b.ifr[e][p] = lp.has(ph) ? tot_r : Interval{0, 0};
          b.ifi[e][p] = lp.has(ph) ? tot_i : Interval{0, 0};
        }
      }
    }

    if (round > 0 && change < opts.convergence_tol) break;
  }
  return b;
}

NodalBounds refine_around(const NodalBounds& b, const RefApoint& at,
                          double shrink, double floor) {
  NodalBounds out = b;
  auto tighten = [&](Interval& box, double v) {
    const double half = std::max(shrink * box.width(), floor);
    const double c = std::min(std::max(v, box.lo), box.hi);
    box = box.meet(Interval{c - half, c + half}).value_or(box);
  };
  for (size_t j = 0; j < b.vr.size(); ++j)
    for (int p = 0; p < 3; ++p) {
      tighten(out.vr[j][p], at.vr[j][p]);
      tighten(out.vi[j][p], at.vi[j][p]);
      tighten(out.ir[j][p], at.ir[j][p]);
      tighten(out.ii[j][p], at.ii[j][p]);
    }
  return out;
}

}  // namespace dqm
