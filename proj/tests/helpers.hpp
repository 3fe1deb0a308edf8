#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dqm/devices.hpp"
#include "dqm/feeder_io.hpp"

namespace dqm::test {

inline std::string data_path(const std::string& rel) {
  return std::string(DQM_DATA_DIR) + "/" + rel;
}

inline NetworkModel two_bus() { return load_network(data_path("feeders/two_bus.csv")); }
inline NetworkModel five_bus() { return load_network(data_path("feeders/five_bus.csv")); }
inline NetworkModel thirteen_bus() {
  return load_network(data_path("feeders/thirteen_bus.csv"));
}

inline DeviceSet two_bus_devices(const NetworkModel& net) {
  return load_devices(data_path("devices/two_bus_devices.csv"), net);
}
inline DeviceSet five_bus_devices(const NetworkModel& net) {
  return load_devices(data_path("devices/five_bus_devices.csv"), net);
}
inline DeviceSet thirteen_bus_devices(const NetworkModel& net) {
  return load_devices(data_path("devices/thirteen_bus_devices.csv"), net);
}

inline PeriodInput flat_period(const DeviceSet& ds, double lambda = 50.0,
                               double avail = 1.0, double scale = 1.0) {
  PeriodInput in;
  in.lambda_p = lambda;
  in.gen_avail.assign(ds.generators.size(), avail);
  in.load_scale.assign(ds.loads.size(), scale);
  return in;
}

/// Independent fixed-point power-flow oracle for radial feeders with fixed
/// loads only (no generators). Returns per-bus complex voltages and nodal
/// injection currents; used to cross-check bounds and assembled rows.
struct PfSolution {
  std::vector<Eigen::Vector3cd> v;       // per bus
  std::vector<Eigen::Vector3cd> i_inj;   // per bus
  std::vector<Eigen::Vector3cd> i_flow;  // per line (from -> to)
  bool converged = false;
};

inline PfSolution solve_pf_fixed_loads(const NetworkModel& net,
                                       const DeviceSet& ds,
                                       const PeriodInput& in) {
  PfSolution out;
  const int n = net.num_buses();
  out.v.assign(n, Eigen::Vector3cd::Zero());
  out.i_inj.assign(n, Eigen::Vector3cd::Zero());
  out.i_flow.assign(net.num_lines(), Eigen::Vector3cd::Zero());
  // Nominal start.
  for (int j = 0; j < n; ++j)
    for (Phase ph : kAllPhases)
      if (net.buses()[j].phases.has(ph))
        out.v[j][phase_index(ph)] = phase_unit(ph);
  // Complex demand per bus-phase.
  std::vector<Eigen::Vector3cd> s_inj(n, Eigen::Vector3cd::Zero());
  for (size_t l = 0; l < ds.loads.size(); ++l) {
    const Load& ld = ds.loads[l];
    s_inj[net.bus_index(ld.bus)][phase_index(ld.phase)] -=
        Complex(in.load_scale[l] * ld.p, in.load_scale[l] * ld.q);
  }
  for (int iter = 0; iter < 200; ++iter) {
    // Injection currents from the current voltage guess.
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < 3; ++p)
        out.i_inj[j][p] = out.v[j][p] == Complex(0, 0)
                              ? Complex(0, 0)
                              : std::conj(s_inj[j][p] / out.v[j][p]);
    // Flows by subtree accumulation (reverse BFS).
    std::vector<Eigen::Vector3cd> acc = out.i_inj;
    const auto& order = net.bfs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int j = *it;
      const int e = net.parent_line()[j];
      if (e < 0) continue;
      const Line& ln = net.lines()[e];
      const bool j_is_to = net.bus_index(ln.to_bus) == j;
      const int parent = j_is_to ? net.bus_index(ln.from_bus)
                                 : net.bus_index(ln.to_bus);
      out.i_flow[e] = j_is_to ? -acc[j] : acc[j];
      acc[parent] += acc[j];
    }
    // Voltage update from the slack.
    double change = 0;
    for (int j : net.bfs_order()) {
      const int e = net.parent_line()[j];
      if (e < 0) continue;
      const Line& ln = net.lines()[e];
      const bool j_is_to = net.bus_index(ln.to_bus) == j;
      const int parent = j_is_to ? net.bus_index(ln.from_bus)
                                 : net.bus_index(ln.to_bus);
      Eigen::Vector3cd drop = ln.z * out.i_flow[e];
      Eigen::Vector3cd nv = j_is_to ? (out.v[parent] - drop).eval()
                                    : (out.v[parent] + drop).eval();
      for (Phase ph : kAllPhases) {
        const int p = phase_index(ph);
        if (!net.buses()[j].phases.has(ph) || !ln.phases().has(ph)) continue;
        change = std::max(change, std::abs(nv[p] - out.v[j][p]));
        out.v[j][p] = nv[p];
      }
    }
    if (change < 1e-13) {
      out.converged = true;
      break;
    }
  }
  // The slack bus balances the feeder; its injection comes from the flows.
  const int s = net.slack_index();
  out.i_inj[s].setZero();
  for (int e : net.lines_at()[s]) {
    const double sign = net.bus_index(net.lines()[e].from_bus) == s ? 1.0 : -1.0;
    out.i_inj[s] += sign * out.i_flow[e];
  }
  return out;
}

}  // namespace dqm::test
