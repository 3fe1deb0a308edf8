#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dqm/opf.hpp"
#include "dqm/pac.hpp"
#include "dqm/qpsolve.hpp"

namespace dqm {

enum class SolveMethod : int { Centralized = 0, Pac };

struct MarketOptions {
  OpfOptions opf;
  BoundsOptions bounds;
  SolveOptions solve;
  PacConfig pac;
  SolveMethod method = SolveMethod::Centralized;
  /// Envelope refinement: re-solve with boxes shrunk around the incumbent
  /// until the bilinear gap target is met or the pass budget is exhausted.
  int refine_passes = 2;
  double refine_shrink = 0.3;
  double refine_floor = 1e-4;   // minimum half-width kept, p.u.
  double gap_target = 0.005;    // p.u. absolute gap that stops refining
};

/// Dispatch, duals, and diagnostics of one cleared 5-minute period.
struct ClearingResult {
  int day = 0;
  int slot = 0;
  double duration_hours = 5.0 / 60.0;
  double lambda_p = 0.0;

  struct NodePhase {
    bool present = false;
    double p = 0, q = 0;          // claimed net injection, p.u.
    double p_true = 0, q_true = 0;  // V-I products, p.u.
    double vr = 0, vi = 0, ir = 0, ii = 0;
    double price_p = 0, price_q = 0;  // $/MWh, $/MVARh
  };
  std::vector<std::array<NodePhase, 3>> node;            // [bus][phase]
  std::vector<std::array<std::array<double, 2>, 3>> gen; // [gen][ph][P,Q] p.u.
  std::vector<std::array<double, 2>> load;               // [load][P,Q] p.u.
  std::vector<std::array<double, 3>> cap;                // [bank][ph] Q p.u.
  std::array<std::array<double, 2>, 3> slack{};          // [ph][P,Q] p.u.

  double loss_p = 0, loss_q = 0;       // instantaneous, p.u.
  double balance_p = 0, balance_q = 0; // physics residuals (true products)
  double bilinear_gap = 0, bilinear_rel_gap = 0;
  double pf_violation = 0;             // max cone violation over DGs, p.u.

  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  int refine_passes_used = 0;
  bool pac_fell_back = false;          // PAC failed and the oracle was used
  std::string pac_message;
};

/// Clears one period: bound pre-processing, QP assembly, solve (PAC periods
/// that fail to converge fall back to the centralized oracle and are
/// flagged), then optional envelope-refinement passes.
ClearingResult clear_period(const NetworkModel& net, const DeviceSet& devices,
                            const PeriodInput& input, const MarketOptions& opts);

/// Daily volume-weighted average duals per node (the d-LMP), plus the same
/// average for real power.
struct DailyDLMP {
  struct Node {
    double mu_q = 0;      // $/MVARh
    double mu_p = 0;      // $/MWh
    double q_volume = 0;  // sum of signed nodal Q over the day, p.u.
    double p_volume = 0;
    bool q_zero_volume = false;  // fallback: unweighted mean used
    bool q_mixed_sign = false;   // signed weights of both signs in the day
  };
  int day = 0;
  std::vector<Node> nodes;
};

/// Weighted average of the per-period duals with the period's nodal volume
/// as weight. The payout identity mu_bar * sum_t Q_t == sum_t mu_t Q_t holds
/// exactly for every node with nonzero volume.
DailyDLMP compute_dlmp(const std::vector<ClearingResult>& day_results);

/// Settlement of a day: per-DG revenues (real at per-period duals, reactive
/// at the daily d-LMP) and the network Q-revenue ratio.
struct Settlement {
  struct GenRow {
    std::string id;
    int bus = 0;
    double revenue_p = 0;  // $
    double revenue_q = 0;  // $
    double ratio = 0;      // reactive / total
    bool excluded = false; // zero total revenue, excluded from the mean
  };
  std::vector<GenRow> gens;
  double q_revenue_ratio = 0;  // mean of per-DG ratios
};

Settlement settle(const std::vector<ClearingResult>& day_results,
                  const DailyDLMP& dlmp, const DeviceSet& devices,
                  const NetworkModel& net);

}  // namespace dqm
