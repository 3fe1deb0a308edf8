#pragma once

#include <vector>

#include "dqm/devices.hpp"
#include "dqm/interval.hpp"
#include "dqm/network.hpp"

namespace dqm {

/// Per node-phase rectangular bounds on I and V, plus per line-phase bounds
/// on flow currents (all p.u.). Index [bus][phase] / [line][phase].
struct NodalBounds {
  std::vector<std::array<Interval, 3>> vr, vi, ir, ii;
  std::vector<std::array<Interval, 3>> ifr, ifi;
  /// Net nodal injection intervals implied by the devices (diagnostic).
  std::vector<std::array<Interval, 3>> p_net, q_net;
};

struct BoundsOptions {
  int rounds = 3;
  /// Half-width of the voltage-angle sector around the nominal phase angle,
  /// degrees. Defines the rectangular box enclosing the magnitude annulus.
  double angle_halfwidth_deg = 10.0;
  /// P and Q range assumed for the transmission import at the slack, p.u.
  double slack_limit = 10.0;
  /// Stop early when no box edge moves more than this between rounds.
  double convergence_tol = 1e-6;
};

/// Interval forward-backward sweep: voltage boxes from the magnitude limits,
/// nodal current intervals from device power bounds by interval division
/// I = (P - jQ)V / |V|^2 with a |I| <= S_max/V_min magnitude cut, flow
/// intervals by Kirchhoff subtree sums (radial networks), voltage updates by
/// interval Ohm's law from the slack. Sound: the result encloses every
/// feasible point of the exact model within the stated voltage boxes.
/// Throws SolverError naming the node-phase if an intersection comes up empty.
NodalBounds tighten_bounds(const NetworkModel& net, const DeviceSet& devices,
                           const PeriodInput& input, int rounds,
                           const BoundsOptions& opts = {});

inline NodalBounds tighten_bounds(const NetworkModel& net,
                                  const DeviceSet& devices,
                                  const PeriodInput& input,
                                  const BoundsOptions& opts = {}) {
  return tighten_bounds(net, devices, input, opts.rounds, opts);
}

/// Shrinks the V/I boxes of `b` around a reference point (e.g. an incumbent
/// relaxation solution), keeping at least `floor` p.u. of slack on each side
/// and never growing a box. Used for the iterative envelope refinement.
struct RefApoint {
  std::vector<std::array<double, 3>> vr, vi, ir, ii;
};
NodalBounds refine_around(const NodalBounds& b, const RefApoint& at,
                          double shrink, double floor);

/// Net nodal (P, Q) injection intervals from the device data for one period.
void net_injection_intervals(const NetworkModel& net, const DeviceSet& devices,
                             const PeriodInput& input, double slack_limit,
                             std::vector<std::array<Interval, 3>>* p_net,
                             std::vector<std::array<Interval, 3>>* q_net);

}  // namespace dqm
