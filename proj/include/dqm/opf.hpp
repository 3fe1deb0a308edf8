#pragma once

#include "dqm/bounds.hpp"
#include "dqm/devices.hpp"
#include "dqm/mccormick.hpp"
#include "dqm/network.hpp"
#include "dqm/qp.hpp"

namespace dqm {

struct OpfOptions {
  /// Weight of the line-loss term against the welfare terms.
  double zeta = 0.1;
  /// Price scale turning the p.u. loss term into objective units ($/MWh).
  double lambda_ref = 50.0;
  /// Transmission import box at the slack, p.u. per phase.
  double slack_limit = 10.0;
  /// Factor intervals narrower than this become exact-line equalities.
  double degenerate_tol = 1e-9;
  /// When false, load disutility coefficients are applied as given and an
  /// indefinite M is reported instead of being capped.
  bool cap_disutility = true;
};

/// Quadratic/linear objective contribution of the devices plus the loss term
/// (generator costs, load disutility, zeta * flow-current losses), written
/// into triplets/c against an existing variable layout.
void assemble_objective(const NetworkModel& net, const DeviceSet& devices,
                        const PeriodInput& input, const OpfOptions& opts,
                        const StandardFormQP& layout,
                        std::vector<Eigen::Triplet<double>>* m_triplets,
                        Eigen::VectorXd* c);

/// Assembles the full standard-form QP for one period: branch Ohm rows,
/// nodal current balance, P/Q definitions through McCormick product
/// variables, device balances, PF cones, and all box rows. Throws
/// ValidationError on index collisions, infeasible fixed values, or an
/// indefinite objective.
StandardFormQP assemble_qp(const NetworkModel& net, const DeviceSet& devices,
                           const PeriodInput& input, const NodalBounds& bounds,
                           const OpfOptions& opts = {});

/// Per node-phase recovery of P, Q and the bilinear consistency gap.
struct PqRecovery {
  struct Entry {
    int bus;
    Phase ph;
    double p, q;            // claimed (variable values), p.u.
    double p_true, q_true;  // products of the V and I variables
    double gap_p, gap_q;
    double apparent;        // |S| from the claimed values
  };
  std::vector<Entry> entries;
  double max_gap = 0.0;          // max over entries of max(gap_p, gap_q)
  double max_rel_gap = 0.0;      // gap over max(apparent, floor)
  double apparent_floor = 1e-3;  // p.u.
};
PqRecovery recover_pq(const StandardFormQP& qp, const Eigen::VectorXd& x,
                      const NetworkModel& net);

}  // namespace dqm
