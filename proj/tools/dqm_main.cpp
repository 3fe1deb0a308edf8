#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "dqm/atoms.hpp"
#include "dqm/config.hpp"
#include "dqm/csv.hpp"
#include "dqm/feeder_io.hpp"
#include "dqm/scenario.hpp"

namespace fs = std::filesystem;
using namespace dqm;

namespace {

nlohmann::json metrics_json(const ScenarioMetrics& m) {
  return {
      {"pf_min", m.pf_min},
      {"penetration_target", m.penetration_target},
      {"penetration_achieved", m.penetration_achieved},
      {"energy_penetration", m.energy_penetration},
      {"dg_q_utilization", m.dg_q_utilization},
      {"dg_p_utilization", m.dg_p_utilization},
      {"peak_dg_p_utilization", m.peak_dg_p_utilization},
      {"network_losses", m.network_losses},
      {"mean_voltage_gen", m.mean_voltage_gen},
      {"mean_voltage_all", m.mean_voltage_all},
      {"q_revenue_ratio", m.q_revenue_ratio},
      {"mean_dlmp_q", m.mean_dlmp_q},
      {"cv_period_duals", m.cv_period_duals},
      {"cv_daily_dlmp", m.cv_daily_dlmp},
      {"max_bilinear_rel_gap", m.max_bilinear_rel_gap},
      {"max_balance_p", m.max_balance_p},
      {"max_balance_q", m.max_balance_q},
      {"max_pf_violation", m.max_pf_violation},
      {"periods_solved", m.periods_solved},
      {"fallback_periods", m.fallback_periods},
  };
}

void write_sweep_csv(const std::string& path, const SweepReport& rep,
                     const std::string& axis) {
  csv::Writer w(path);
  w.row({axis == "pf" ? "pf_min" : "penetration", "penetration_achieved",
         "energy_penetration", "dg_q_utilization", "dg_p_utilization",
         "peak_dg_p_utilization", "network_losses", "mean_voltage_gen",
         "mean_voltage_all", "q_revenue_ratio", "mean_dlmp_q",
         "cv_period_duals", "cv_daily_dlmp", "max_bilinear_rel_gap"});
  for (const ScenarioMetrics& m : rep.points)
    w.row({csv::fmt(axis == "pf" ? m.pf_min : m.penetration_target),
           csv::fmt(m.penetration_achieved), csv::fmt(m.energy_penetration),
           csv::fmt(m.dg_q_utilization), csv::fmt(m.dg_p_utilization),
           csv::fmt(m.peak_dg_p_utilization), csv::fmt(m.network_losses),
           csv::fmt(m.mean_voltage_gen), csv::fmt(m.mean_voltage_all),
           csv::fmt(m.q_revenue_ratio), csv::fmt(m.mean_dlmp_q),
           csv::fmt(m.cv_period_duals), csv::fmt(m.cv_daily_dlmp),
           csv::fmt(m.max_bilinear_rel_gap)});
}

void write_clearing_csv(const std::string& path, const NetworkModel& net,
                        const ScenarioResult& res) {
  csv::Writer w(path);
  w.row({"day", "slot", "bus", "phase", "p_kw", "q_kvar", "v_pu", "i_pu",
         "price_p_mwh", "price_q_mvarh"});
  const double sb1 = net.base_kva_1ph();
  for (const auto& day : res.results)
    for (const ClearingResult& r : day)
      for (int j = 0; j < net.num_buses(); ++j)
        for (int p = 0; p < 3; ++p) {
          const auto& np = r.node[j][p];
          if (!np.present) continue;
          w.row({std::to_string(r.day), std::to_string(r.slot),
                 std::to_string(net.buses()[j].id),
                 std::string(1, phase_label(static_cast<Phase>(p))),
                 csv::fmt(np.p * sb1), csv::fmt(np.q * sb1),
                 csv::fmt(std::hypot(np.vr, np.vi)),
                 csv::fmt(std::hypot(np.ir, np.ii)), csv::fmt(np.price_p),
                 csv::fmt(np.price_q)});
        }
}

void write_dlmp_csv(const std::string& path, const NetworkModel& net,
                    const ScenarioResult& res) {
  csv::Writer w(path);
  w.row({"day", "bus", "mu_q_mvarh", "mu_p_mwh", "q_volume_pu", "zero_volume",
         "mixed_sign"});
  for (const DailyDLMP& d : res.dlmps)
    for (size_t j = 0; j < d.nodes.size(); ++j)
      w.row({std::to_string(d.day), std::to_string(net.buses()[j].id),
             csv::fmt(d.nodes[j].mu_q), csv::fmt(d.nodes[j].mu_p),
             csv::fmt(d.nodes[j].q_volume),
             d.nodes[j].q_zero_volume ? "1" : "0",
             d.nodes[j].q_mixed_sign ? "1" : "0"});
}

void write_settlement_csv(const std::string& path, const NetworkModel& net,
                          const ScenarioResult& res) {
  csv::Writer w(path);
  w.row({"day", "gen", "bus", "revenue_p", "revenue_q", "ratio", "excluded"});
  for (size_t d = 0; d < res.settlements.size(); ++d)
    for (const auto& g : res.settlements[d].gens)
      w.row({std::to_string(d), g.id, std::to_string(net.buses()[g.bus].id),
             csv::fmt(g.revenue_p), csv::fmt(g.revenue_q), csv::fmt(g.ratio),
             g.excluded ? "1" : "0"});
}

void write_manifest(const std::string& dir, const std::vector<std::string>& names) {
  nlohmann::json j;
  j["artifacts"] = nlohmann::json::array();
  for (const std::string& name : names) {
    const std::string full = dir + "/" + name;
    j["artifacts"].push_back({{"name", name},
                              {"bytes", fs::file_size(full)},
                              {"fnv1a64", fnv1a64_file(full)}});
  }
  std::ofstream out(dir + "/manifest.json");
  out << j.dump(2) << "\n";
}

int cmd_validate(const RunConfig& rc) {
  const NetworkModel net = load_network(rc.scenario.feeder_path);
  const DeviceSet devices = load_devices(rc.scenario.devices_path, net);
  std::cout << "feeder: " << rc.scenario.feeder_path << "\n"
            << "  buses: " << net.num_buses() << ", lines: " << net.num_lines()
            << ", capbanks: " << net.cap_banks().size() << "\n"
            << "  radial: " << (net.is_radial() ? "yes" : "no") << "\n"
            << "devices: " << devices.generators.size() << " generators, "
            << devices.loads.size() << " loads\n";
  // Exercise one assembly end to end so schema problems surface here.
  ProfileSet profiles = make_synthetic_profiles(rc.scenario.seed,
                                                rc.scenario.slots_per_day, 1);
  Rng rng(rc.scenario.seed);
  draw_load_multipliers(&profiles, devices.loads.size(), &rng);
  const PeriodInput in =
      build_period_input(devices, profiles, 0, rc.scenario.slots_per_day / 2);
  const NodalBounds bounds =
      tighten_bounds(net, devices, in, rc.scenario.market.bounds);
  const StandardFormQP qp =
      assemble_qp(net, devices, in, bounds, rc.scenario.market.opf);
  std::cout << "assembled midday QP: " << qp.n << " variables, "
            << qp.G.rows() << " equalities, " << qp.H.rows()
            << " inequalities\n"
            << "validate: ok\n";
  return 0;
}

int cmd_run(const RunConfig& rc, const std::string& out_dir) {
  const NetworkModel net = load_network(rc.scenario.feeder_path);
  const DeviceSet base = load_devices(rc.scenario.devices_path, net);
  ScenarioConfig cfg = rc.scenario;
  cfg.keep_results = true;
  fs::create_directories(out_dir);
  if (!cfg.trace_dir.empty()) fs::create_directories(cfg.trace_dir);
  const ScenarioResult res = run_scenario(net, base, cfg);

  write_clearing_csv(out_dir + "/clearing.csv", net, res);
  write_dlmp_csv(out_dir + "/dlmp.csv", net, res);
  write_settlement_csv(out_dir + "/settlement.csv", net, res);
  nlohmann::json mj = metrics_json(res.metrics);
  mj["seed"] = cfg.seed;
  mj["config"] = fnv1a64_file(rc.config_path);
  {
    std::ofstream out(out_dir + "/metrics.json");
    out << mj.dump(2) << "\n";
  }
  write_manifest(out_dir,
                 {"clearing.csv", "dlmp.csv", "settlement.csv", "metrics.json"});
  std::cout << "run: " << res.metrics.periods_solved << " periods, outputs in "
            << out_dir << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& rc, const std::string& out_dir) {
  const NetworkModel net = load_network(rc.scenario.feeder_path);
  const DeviceSet base = load_devices(rc.scenario.devices_path, net);
  fs::create_directories(out_dir);
  SweepReport rep;
  if (rc.sweep_axis == "pf")
    rep = run_pf_sweep(net, base, rc.scenario, rc.pf_values);
  else
    rep = run_penetration_sweep(net, base, rc.scenario, rc.penetration_values);
  write_sweep_csv(out_dir + "/sweep.csv", rep, rc.sweep_axis);
  nlohmann::json j;
  j["axis"] = rc.sweep_axis;
  j["seed"] = rep.seed;
  j["points"] = nlohmann::json::array();
  for (const ScenarioMetrics& m : rep.points) j["points"].push_back(metrics_json(m));
  {
    std::ofstream out(out_dir + "/sweep.json");
    out << j.dump(2) << "\n";
  }
  write_manifest(out_dir, {"sweep.csv", "sweep.json"});
  std::cout << "sweep (" << rc.sweep_axis << "): " << rep.points.size()
            << " points, outputs in " << out_dir << "\n";
  return 0;
}

int cmd_compare(const RunConfig& rc, const std::string& out_dir) {
  const NetworkModel net = load_network(rc.scenario.feeder_path);
  const DeviceSet base = load_devices(rc.scenario.devices_path, net);
  ScenarioConfig cfg = rc.scenario;
  ProfileSet profiles = make_synthetic_profiles(cfg.seed, cfg.slots_per_day, 1);
  Rng rng(cfg.seed);
  draw_load_multipliers(&profiles, base.loads.size(), &rng);
  double achieved = 0;
  const DeviceSet devices =
      place_pv_clusters(net, base, cfg, profiles, &rng, &achieved);
  const PeriodInput in =
      build_period_input(devices, profiles, 0, cfg.slots_per_day / 2);
  const NodalBounds bounds = tighten_bounds(net, devices, in, cfg.market.bounds);
  const StandardFormQP qp = assemble_qp(net, devices, in, bounds, cfg.market.opf);

  const PrimalDualSolution oracle = solve_centralized(qp, cfg.market.solve);
  if (oracle.status != SolveStatus::Optimal) {
    std::cerr << "compare: oracle failed: " << status_name(oracle.status) << "\n";
    return 2;
  }
  const AtomSystem sys = atomize(qp, net);
  const PrimalDualSolution pac = pac_iterate(sys, qp, cfg.market.pac);

  double max_rel_primal = 0;
  const double xscale = oracle.x.cwiseAbs().maxCoeff();
  for (int i = 0; i < qp.n; ++i)
    max_rel_primal =
        std::max(max_rel_primal, std::abs(pac.x[i] - oracle.x[i]) / (1.0 + xscale));
  double max_dual_diff = 0;
  for (int j = 0; j < net.num_buses(); ++j)
    for (Phase ph : kAllPhases) {
      if (!net.buses()[j].phases.has(ph)) continue;
      max_dual_diff = std::max(
          {max_dual_diff,
           std::abs(pac.mu[qp.pdef_row(j, ph)] - oracle.mu[qp.pdef_row(j, ph)]),
           std::abs(pac.mu[qp.qdef_row(j, ph)] - oracle.mu[qp.qdef_row(j, ph)])});
    }
  const double obj_rel = std::abs(pac.objective - oracle.objective) /
                         std::max(1e-12, std::abs(oracle.objective));

  fs::create_directories(out_dir);
  csv::Writer w(out_dir + "/compare.csv");
  w.row({"quantity", "value"});
  w.row({"pac_status", status_name(pac.status)});
  w.row({"pac_iterations", std::to_string(pac.iterations)});
  w.row({"objective_oracle", csv::fmt(oracle.objective)});
  w.row({"objective_pac", csv::fmt(pac.objective)});
  w.row({"objective_rel_diff", csv::fmt(obj_rel)});
  w.row({"max_rel_primal_diff", csv::fmt(max_rel_primal)});
  w.row({"max_pq_dual_diff", csv::fmt(max_dual_diff)});
  write_manifest(out_dir, {"compare.csv"});
  std::cout << "compare: objective rel diff " << csv::fmt(obj_rel)
            << ", max primal rel diff " << csv::fmt(max_rel_primal)
            << ", max P/Q dual diff " << csv::fmt(max_dual_diff) << "\n";
  if (pac.status != SolveStatus::Optimal) {
    std::cerr << "compare: PAC did not converge: " << pac.message << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distribution-level reactive power market simulator"};
  app.require_subcommand(1);
  std::string config_path, out_override;
  std::int64_t seed_override = -1;
  int workers = 1;
  bool trace = false;
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--seed", seed_override, "seed override");
  app.add_option("--workers", workers, "parallel workers for period clearing");
  app.add_flag("--trace", trace, "write per-solve iteration traces");
  auto* validate = app.add_subcommand("validate", "check config and inputs");
  auto* run = app.add_subcommand("run", "run one scenario");
  auto* sweep = app.add_subcommand("sweep", "run the configured sweep");
  auto* compare = app.add_subcommand("compare", "PAC vs centralized on one period");
  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig rc = load_run_config(config_path);
    if (seed_override >= 0)
      rc.scenario.seed = static_cast<std::uint64_t>(seed_override);
    rc.scenario.workers = workers;
    rc.scenario.market.pac.workers = workers;
    const std::string out_dir =
        out_override.empty() ? rc.output_dir : out_override;
    if (trace) rc.scenario.trace_dir = out_dir + "/traces";

    if (validate->parsed()) return cmd_validate(rc);
    if (run->parsed()) return cmd_run(rc, out_dir);
    if (sweep->parsed()) return cmd_sweep(rc, out_dir);
    if (compare->parsed()) return cmd_compare(rc, out_dir);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
