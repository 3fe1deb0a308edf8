#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <unordered_map>
#include <vector>

#include "dqm/common.hpp"

namespace dqm {

/// One bus of the feeder. Voltage bounds are magnitude limits in p.u.;
/// rectangular boxes are derived from them by the bound pre-processing.
struct Bus {
  int id = 0;                 // external id, >= 1
  PhaseMask phases;           // phases present at the bus
  bool is_slack = false;      // exactly one bus, the PCC
  double vmin = 0.95;         // p.u. magnitude lower limit
  double vmax = 1.05;         // p.u. magnitude upper limit
};

/// A series branch between two buses. The impedance block is 3x3 complex in
/// p.u., symmetric, with zero rows/columns for phases the line does not carry.
struct Line {
  int from_bus = 0;           // external bus ids
  int to_bus = 0;
  Eigen::Matrix3cd z;         // p.u. series impedance block
  std::array<double, 3> ampacity{0.0, 0.0, 0.0};  // p.u. |I| limit, 0 = none
  double length = 0.0;        // informational (original units)

  PhaseMask phases() const {
    PhaseMask m;
    for (Phase p : kAllPhases)
      if (std::abs(z(phase_index(p), phase_index(p))) > 0.0) m.set(p);
    return m;
  }
};

/// Shunt capacitor bank: zero-cost reactive-only device, Q in [0, capacity].
struct CapacitorBank {
  int bus = 0;
  std::array<double, 3> q_max{0.0, 0.0, 0.0};  // p.u. per phase
};

/// Validated model of the unbalanced three-phase feeder in per-unit.
/// Immutable after construction; safe to share read-only across workers.
class NetworkModel {
 public:
  NetworkModel(std::vector<Bus> buses, std::vector<Line> lines,
               std::vector<CapacitorBank> caps, double base_kva,
               double base_kv_ll);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  const std::vector<CapacitorBank>& cap_banks() const { return caps_; }

  int num_buses() const { return static_cast<int>(buses_.size()); }
  int num_lines() const { return static_cast<int>(lines_.size()); }

  double base_kva() const { return base_kva_; }
  double base_kv_ll() const { return base_kv_ll_; }
  /// Per-phase power base, kVA. Phase quantities are normalized by this.
  double base_kva_1ph() const { return base_kva_ / 3.0; }
  /// Line-to-neutral voltage base, kV.
  double base_kv_ln() const { return base_kv_ll_ / std::sqrt(3.0); }
  /// Impedance base, ohms.
  double base_ohm() const { return base_kv_ll_ * base_kv_ll_ * 1000.0 / base_kva_; }

  /// Internal dense index of an external bus id; throws if unknown.
  int bus_index(int bus_id) const;
  bool has_bus(int bus_id) const;
  int slack_index() const { return slack_index_; }

  bool is_radial() const { return num_lines() == num_buses() - 1; }
  /// Parent line index of a bus in the tree rooted at the slack (-1 for the
  /// slack itself). Only available on radial networks.
  const std::vector<int>& parent_line() const { return parent_line_; }
  /// Bus indices in breadth-first order from the slack.
  const std::vector<int>& bfs_order() const { return bfs_order_; }
  /// Line indices incident to each bus.
  const std::vector<std::vector<int>>& lines_at() const { return lines_at_; }

 private:
  void validate() const;
  void build_topology();

  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  std::vector<CapacitorBank> caps_;
  double base_kva_;
  double base_kv_ll_;
  int slack_index_ = -1;
  std::unordered_map<int, int> id_to_index_;
  std::vector<int> parent_line_;
  std::vector<int> bfs_order_;
  std::vector<std::vector<int>> lines_at_;
};

/// 3-phase incidence matrix A, shape 3E x 3N, +1 at (line-phase, from-bus
/// phase) and -1 at the to-bus phase for phases the line carries; all-zero
/// rows for absent phases.
Eigen::SparseMatrix<double> build_incidence(const NetworkModel& net);

/// Block-diagonal branch impedance (3E x 3E complex); block e is line e's
/// impedance block. Throws if a present phase has a singular diagonal.
Eigen::SparseMatrix<Complex> build_branch_impedance(const NetworkModel& net);

}  // namespace dqm
