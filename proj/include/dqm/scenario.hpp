#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dqm/market.hpp"
#include "dqm/metrics.hpp"
#include "dqm/profiles.hpp"

namespace dqm {

struct ScenarioConfig {
  std::string feeder_path;
  std::string devices_path;   // loads (and any pre-placed generators)
  int days = 1;
  int slots_per_day = 288;
  double pf_min = 0.9;
  double target_penetration = 1.2;  // nameplate over average load
  int max_cluster_nodes = 27;
  double cluster_min_kw = 25.0;
  double cluster_max_kw = 80.0;
  double dg_bid = 10.0;             // $/MWh (b^P of placed clusters)
  std::uint64_t seed = 1;
  int workers = 1;
  MarketOptions market;
  std::string pv_profile_csv, load_profile_csv, lambda_profile_csv;
  bool keep_results = false;        // retain every ClearingResult
  std::string trace_dir;            // per-solve iteration traces when set
};

/// Aggregate metrics for one scenario point.
struct ScenarioMetrics {
  double pf_min = 0;
  double penetration_target = 0;
  double penetration_achieved = 0;
  double energy_penetration = 0;
  double dg_q_utilization = 0;
  double dg_p_utilization = 0;
  double peak_dg_p_utilization = 0;
  double network_losses = 0;       // mean p.u.
  double mean_voltage_gen = 0;     // over generator buses (as defined)
  double mean_voltage_all = 0;     // over all buses
  double q_revenue_ratio = 0;
  double mean_dlmp_q = 0;          // network-mean daily d-LMP over DG nodes
  double cv_period_duals = 0;      // mean over DG nodes
  double cv_daily_dlmp = 0;        // mean over DG nodes (multi-day runs)
  double max_bilinear_rel_gap = 0;
  double max_balance_p = 0, max_balance_q = 0;
  double max_pf_violation = 0;
  int periods_solved = 0;
  int fallback_periods = 0;
  double runtime_seconds = 0;
};

struct ScenarioResult {
  ScenarioConfig config;
  DeviceSet devices;               // with placed clusters
  ScenarioMetrics metrics;
  std::vector<DailyDLMP> dlmps;          // per day
  std::vector<Settlement> settlements;   // per day
  std::vector<std::vector<ClearingResult>> results;  // kept when requested
  std::vector<int> dg_buses;
};

/// Adds PV clusters (25-80 kW each, up to the node budget; several clusters
/// may stack on one node) until the target penetration is reached within one
/// cluster's capacity. Deterministic under the seed.
DeviceSet place_pv_clusters(const NetworkModel& net, const DeviceSet& base,
                            const ScenarioConfig& cfg, const ProfileSet& profiles,
                            Rng* rng, double* achieved_penetration);

/// Full pipeline for one scenario point: placement, day loop of period
/// clearings, d-LMPs, settlements, metrics.
ScenarioResult run_scenario(const NetworkModel& net, const DeviceSet& base_devices,
                            const ScenarioConfig& cfg);

/// The three experiment drivers.
struct SweepReport {
  std::vector<ScenarioMetrics> points;
  std::uint64_t seed = 0;
};
SweepReport run_pf_sweep(const NetworkModel& net, const DeviceSet& base,
                         ScenarioConfig cfg, const std::vector<double>& pf_values);
SweepReport run_penetration_sweep(const NetworkModel& net, const DeviceSet& base,
                                  ScenarioConfig cfg,
                                  const std::vector<double>& penetrations);
ScenarioResult run_week(const NetworkModel& net, const DeviceSet& base,
                        ScenarioConfig cfg);

}  // namespace dqm
