#pragma once

#include <string>
#include <vector>

#include "dqm/network.hpp"

namespace dqm {

/// A distributed generator (one record per bus; bounds and costs per phase).
/// Bounds are in p.u. after loading; costs in $/MWh against p.u. power.
struct Generator {
  std::string id;
  int bus = 0;
  PhaseMask phases;
  std::array<double, 3> p_min{0, 0, 0};
  std::array<double, 3> p_max{0, 0, 0};  // nameplate per phase
  std::array<double, 3> q_min{0, 0, 0};
  std::array<double, 3> q_max{0, 0, 0};
  double cost_p_quad = 0.0;   // a^P  ($/MWh per p.u., >= 0)
  double cost_p_lin = 0.0;    // b^P  ($/MWh)
  double cost_q_quad = 0.0;   // a^Q
  double cost_q_lin = -1.0;   // b^Q; negative = default to 0.1 * b^P
  double pf_min = 1.0;        // minimum power factor, in (0, 1]
};

/// A load (one record per bus-phase). Default is inflexible: the demand is
/// fixed each period at shape * base demand. Flexible ranges keep the same
/// variables with wider bounds and a disutility coefficient.
struct Load {
  std::string id;
  int bus = 0;
  Phase phase = Phase::A;
  double p = 0.0;      // base demand, p.u. (consumption positive)
  double q = 0.0;
  double alpha_p = 0.0;  // disutility coefficients
  double alpha_q = 0.0;
  bool flexible = false;
  double p_lo = 0.0, p_hi = 0.0;  // consumption range when flexible
  double q_lo = 0.0, q_hi = 0.0;
};

/// Devices attached to a network. Capacitor banks live on the NetworkModel;
/// the slack import device is implicit and added by the OPF builder.
struct DeviceSet {
  std::vector<Generator> generators;
  std::vector<Load> loads;

  /// Checks invariants against the network (bounds ordered, pf in (0,1],
  /// devices on present phases). Throws ValidationError.
  void validate(const NetworkModel& net) const;

  /// Total nameplate DG capacity, p.u.
  double total_nameplate() const;
};

/// One market period's exogenous data.
struct PeriodInput {
  int day = 0;
  int slot = 0;                       // 0..slots_per_day-1
  double duration_hours = 5.0 / 60.0;
  double lambda_p = 0.0;              // wholesale price, $/MWh
  /// Available fraction of nameplate per generator (PV profile), in [0,1].
  std::vector<double> gen_avail;
  /// Demand multiplier per load (shape * (1 + delta_j)).
  std::vector<double> load_scale;

  void validate(const DeviceSet& devices) const;
};

/// Loads a devices CSV (see README for columns). Quantities are converted to
/// p.u. using the network bases.
DeviceSet load_devices(const std::string& path, const NetworkModel& net);

}  // namespace dqm
