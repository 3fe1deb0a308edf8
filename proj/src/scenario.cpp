#include "dqm/scenario.hpp"

#include <chrono>
#include <cmath>
#include <set>

namespace dqm {

DeviceSet place_pv_clusters(const NetworkModel& net, const DeviceSet& base,
                            const ScenarioConfig& cfg, const ProfileSet& profiles,
                            Rng* rng, double* achieved_penetration) {
  DeviceSet out = base;
  const double avg_load =
      average_load(base, profiles.load_multiplier, profiles.mean_load_factor());
  if (avg_load <= 0) throw ValidationError("place_pv_clusters: zero average load");
  const double sb1 = net.base_kva_1ph();
  const double target_pu = cfg.target_penetration * avg_load;

  // Candidate nodes: load buses in id order, strided so clusters spread over
  // the feeder, capped at the node budget.
  std::set<int> load_buses;
  for (const Load& l : base.loads) load_buses.insert(l.bus);
  std::vector<int> cands(load_buses.begin(), load_buses.end());
  if (cands.empty()) throw ValidationError("place_pv_clusters: no load buses");
  std::vector<int> nodes;
  const int budget = std::min<int>(cfg.max_cluster_nodes, static_cast<int>(cands.size()));
  const double stride = static_cast<double>(cands.size()) / budget;
  for (int k = 0; k < budget; ++k)
    nodes.push_back(cands[static_cast<int>(k * stride)]);

  std::vector<double> nameplate(nodes.size(), 0.0);  // kW per node
  double placed_pu = 0.0;
  size_t cursor = 0;
  while (placed_pu < target_pu - 1e-12) {
    const double remaining_kw = (target_pu - placed_pu) * sb1;
    double cap_kw = rng->uniform(cfg.cluster_min_kw, cfg.cluster_max_kw);
    if (remaining_kw < cfg.cluster_max_kw)
      cap_kw = std::max(cfg.cluster_min_kw, std::min(cap_kw, remaining_kw));
    nameplate[cursor % nodes.size()] += cap_kw;
    placed_pu += cap_kw / sb1;
    ++cursor;
    if (cursor > 100000)
      throw ValidationError("place_pv_clusters: placement failed to terminate");
  }

  for (size_t k = 0; k < nodes.size(); ++k) {
    if (nameplate[k] <= 0) continue;
    Generator g;
    g.id = "pv" + std::to_string(net.buses()[net.bus_index(nodes[k])].id);
    g.bus = nodes[k];
    g.phases = net.buses()[net.bus_index(nodes[k])].phases;
    const int nph = g.phases.count();
    const double t = cfg.pf_min < 1.0 ? std::tan(std::acos(cfg.pf_min)) : 0.0;
    for (Phase ph : kAllPhases) {
      if (!g.phases.has(ph)) continue;
      const int p = phase_index(ph);
      g.p_max[p] = nameplate[k] / nph / sb1;
      g.q_max[p] = t * g.p_max[p];
      g.q_min[p] = -t * g.p_max[p];
    }
    g.cost_p_lin = cfg.dg_bid;
    g.cost_q_lin = -1.0;  // default rule: 0.1 * b^P
    g.pf_min = cfg.pf_min;
    out.generators.push_back(g);
  }
  if (achieved_penetration) *achieved_penetration = placed_pu / avg_load;
  return out;
}

ScenarioResult run_scenario(const NetworkModel& net, const DeviceSet& base,
                            const ScenarioConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioResult out;
  out.config = cfg;

  ProfileSet profiles =
      make_synthetic_profiles(cfg.seed, cfg.slots_per_day, cfg.days);
  if (!cfg.pv_profile_csv.empty())
    override_series(&profiles.pv, cfg.pv_profile_csv, cfg.slots_per_day);
  if (!cfg.load_profile_csv.empty())
    override_series(&profiles.load_shape, cfg.load_profile_csv, cfg.slots_per_day);
  if (!cfg.lambda_profile_csv.empty())
    override_series(&profiles.lambda, cfg.lambda_profile_csv, cfg.slots_per_day);

  Rng rng(cfg.seed);
  draw_load_multipliers(&profiles, base.loads.size(), &rng);
  double achieved = 0.0;
  out.devices = place_pv_clusters(net, base, cfg, profiles, &rng, &achieved);
  out.devices.validate(net);

  std::set<int> dg_bus_set;
  for (const Generator& g : out.devices.generators)
    dg_bus_set.insert(net.bus_index(g.bus));
  out.dg_buses.assign(dg_bus_set.begin(), dg_bus_set.end());
  std::vector<int> all_buses(net.num_buses());
  for (int j = 0; j < net.num_buses(); ++j) all_buses[j] = j;

  ScenarioMetrics& m = out.metrics;
  m.pf_min = cfg.pf_min;
  m.penetration_target = cfg.target_penetration;
  m.penetration_achieved = achieved;

  // Day loop. Periods are independent given inputs; each day's slots run in
  // a parallel pool, aggregation stays sequential.
  std::vector<ClearingResult> horizon;  // flat, for horizon metrics
  std::vector<std::vector<double>> dual_series(out.dg_buses.size());
  std::vector<std::vector<double>> dlmp_series(out.dg_buses.size());
  double e_loss = 0;
  int nperiods = 0;
  for (int day = 0; day < cfg.days; ++day) {
    std::vector<ClearingResult> day_results(cfg.slots_per_day);
    MarketOptions mopts = cfg.market;
    parallel_for(cfg.slots_per_day, cfg.workers, [&](int slot) {
      MarketOptions local = mopts;
      if (!cfg.trace_dir.empty())
        local.pac.trace_path = cfg.trace_dir + "/trace_d" + std::to_string(day) +
                               "_t" + std::to_string(slot) + ".csv";
      const PeriodInput in = build_period_input(out.devices, profiles, day, slot);
      day_results[slot] = clear_period(net, out.devices, in, local);
    });

    DailyDLMP dlmp = compute_dlmp(day_results);
    Settlement st = settle(day_results, dlmp, out.devices, net);
    m.q_revenue_ratio += st.q_revenue_ratio;
    for (size_t k = 0; k < out.dg_buses.size(); ++k) {
      dlmp_series[k].push_back(dlmp.nodes[out.dg_buses[k]].mu_q);
      for (const ClearingResult& r : day_results) {
        double qv = 0, qpay = 0, mu_mean = 0;
        int nph = 0;
        for (int p = 0; p < 3; ++p) {
          const auto& np = r.node[out.dg_buses[k]][p];
          if (!np.present) continue;
          qv += np.q;
          qpay += np.price_q * np.q;
          mu_mean += np.price_q;
          ++nph;
        }
        dual_series[k].push_back(qv != 0 ? qpay / qv : (nph ? mu_mean / nph : 0));
      }
    }
    for (ClearingResult& r : day_results) {
      m.max_bilinear_rel_gap = std::max(m.max_bilinear_rel_gap, r.bilinear_rel_gap);
      m.max_balance_p = std::max(m.max_balance_p, r.balance_p);
      m.max_balance_q = std::max(m.max_balance_q, r.balance_q);
      m.max_pf_violation = std::max(m.max_pf_violation, r.pf_violation);
      if (r.pac_fell_back) ++m.fallback_periods;
      e_loss += r.loss_p;
      ++nperiods;
    }
    out.dlmps.push_back(std::move(dlmp));
    out.settlements.push_back(std::move(st));
    if (cfg.keep_results) out.results.push_back(day_results);
    horizon.insert(horizon.end(),
                   std::make_move_iterator(day_results.begin()),
                   std::make_move_iterator(day_results.end()));
  }

  m.q_revenue_ratio /= std::max(1, cfg.days);
  m.energy_penetration = dg_energy_penetration(horizon);
  m.dg_q_utilization = dg_q_utilization(horizon);
  m.dg_p_utilization = dg_p_utilization(horizon);
  const auto by_slot = dg_p_utilization_by_slot(horizon);
  for (double u : by_slot) m.peak_dg_p_utilization = std::max(m.peak_dg_p_utilization, u);
  m.network_losses = network_losses(horizon);
  m.mean_voltage_gen = mean_voltage(horizon, out.dg_buses.empty() ? all_buses : out.dg_buses);
  m.mean_voltage_all = mean_voltage(horizon, all_buses);
  double cv_duals = 0, cv_dlmp = 0, mean_dlmp = 0;
  for (size_t k = 0; k < out.dg_buses.size(); ++k) {
    cv_duals += coeff_variation(dual_series[k]);
    cv_dlmp += coeff_variation(dlmp_series[k]);
    for (double v : dlmp_series[k]) mean_dlmp += v / dlmp_series[k].size();
  }
  if (!out.dg_buses.empty()) {
    m.cv_period_duals = cv_duals / out.dg_buses.size();
    m.cv_daily_dlmp = cv_dlmp / out.dg_buses.size();
    m.mean_dlmp_q = mean_dlmp / out.dg_buses.size();
  }
  m.periods_solved = nperiods;
  m.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

SweepReport run_pf_sweep(const NetworkModel& net, const DeviceSet& base,
                         ScenarioConfig cfg, const std::vector<double>& pf_values) {
  SweepReport rep;
  rep.seed = cfg.seed;
  for (double pf : pf_values) {
    ScenarioConfig point = cfg;
    point.pf_min = pf;
    rep.points.push_back(run_scenario(net, base, point).metrics);
  }
  return rep;
}

SweepReport run_penetration_sweep(const NetworkModel& net, const DeviceSet& base,
                                  ScenarioConfig cfg,
                                  const std::vector<double>& penetrations) {
  SweepReport rep;
  rep.seed = cfg.seed;
  for (double pen : penetrations) {
    ScenarioConfig point = cfg;
    point.target_penetration = pen;
    rep.points.push_back(run_scenario(net, base, point).metrics);
  }
  return rep;
}

ScenarioResult run_week(const NetworkModel& net, const DeviceSet& base,
                        ScenarioConfig cfg) {
  cfg.days = 7;
  return run_scenario(net, base, cfg);
}

}  // namespace dqm
