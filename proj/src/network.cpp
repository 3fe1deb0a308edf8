#include "dqm/network.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include "dqm/interval.hpp"

namespace dqm {

double phase_angle(Phase p) {
  constexpr double deg120 = 2.0 * std::numbers::pi / 3.0;
  switch (p) {
    case Phase::A: return 0.0;
    case Phase::B: return -deg120;
    case Phase::C: return deg120;
  }
  return 0.0;
}

Complex phase_unit(Phase p) {
  const double a = phase_angle(p);
  return {std::cos(a), std::sin(a)};
}

std::string PhaseMask::str() const {
  std::string s;
  for (Phase p : kAllPhases)
    if (has(p)) s.push_back(phase_label(p));
  return s;
}

PhaseMask PhaseMask::parse(const std::string& s) {
  PhaseMask m;
  for (char c : s) {
    switch (c) {
      case 'a': case 'A': m.set(Phase::A); break;
      case 'b': case 'B': m.set(Phase::B); break;
      case 'c': case 'C': m.set(Phase::C); break;
      case ' ': break;
      default:
        throw ValidationError("unknown phase label '" + std::string(1, c) +
                              "' in \"" + s + "\"");
    }
  }
  if (!m.any()) throw ValidationError("empty phase set \"" + s + "\"");
  return m;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = std::min(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string Interval::str() const {
  std::ostringstream os;
  os << "[" << lo << ", " << hi << "]";
  return os.str();
}

namespace {
Interval cos_range(double t0, double t1) {
  double lo = std::min(std::cos(t0), std::cos(t1));
  double hi = std::max(std::cos(t0), std::cos(t1));
  // critical points k*pi inside [t0, t1]
  for (double k = std::ceil(t0 / std::numbers::pi); k * std::numbers::pi <= t1; ++k) {
    const double c = std::cos(k * std::numbers::pi);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return {lo, hi};
}
}  // namespace

Interval sector_cos_range(double rmin, double rmax, double t0, double t1) {
  return Interval{rmin, rmax} * cos_range(t0, t1);
}

Interval sector_sin_range(double rmin, double rmax, double t0, double t1) {
  constexpr double h = std::numbers::pi / 2.0;
  return Interval{rmin, rmax} * cos_range(t0 - h, t1 - h);
}

NetworkModel::NetworkModel(std::vector<Bus> buses, std::vector<Line> lines,
                           std::vector<CapacitorBank> caps, double base_kva,
                           double base_kv_ll)
    : buses_(std::move(buses)),
      lines_(std::move(lines)),
      caps_(std::move(caps)),
      base_kva_(base_kva),
      base_kv_ll_(base_kv_ll) {
  for (int i = 0; i < num_buses(); ++i) {
    if (id_to_index_.count(buses_[i].id))
      throw ValidationError("duplicate bus id " + std::to_string(buses_[i].id));
    id_to_index_[buses_[i].id] = i;
    if (buses_[i].is_slack) {
      if (slack_index_ >= 0)
        throw ValidationError("more than one slack bus (bus " +
                              std::to_string(buses_[i].id) + ")");
      slack_index_ = i;
    }
  }
  validate();
  build_topology();
}

bool NetworkModel::has_bus(int bus_id) const {
  return id_to_index_.count(bus_id) > 0;
}

int NetworkModel::bus_index(int bus_id) const {
  auto it = id_to_index_.find(bus_id);
  if (it == id_to_index_.end())
    throw ValidationError("unknown bus id " + std::to_string(bus_id));
  return it->second;
}

void NetworkModel::validate() const {
  if (base_kva_ <= 0 || base_kv_ll_ <= 0)
    throw ValidationError("per-unit bases must be positive");
  if (buses_.empty()) throw ValidationError("network has no buses");
  if (slack_index_ < 0) throw ValidationError("missing slack bus");
  for (const Bus& b : buses_) {
    if (b.id < 1)
      throw ValidationError("bus id must be >= 1, got " + std::to_string(b.id));
    if (!b.phases.any())
      throw ValidationError("bus " + std::to_string(b.id) + " has no phases");
    if (b.vmin > b.vmax || b.vmin <= 0)
      throw ValidationError("bus " + std::to_string(b.id) +
                            " has invalid voltage bounds");
    if (b.vmin > 1.0 || b.vmax < 1.0)
      throw ValidationError("bus " + std::to_string(b.id) +
                            " voltage box excludes nominal 1.0 p.u.");
  }
  for (size_t e = 0; e < lines_.size(); ++e) {
    const Line& ln = lines_[e];
    const std::string tag =
        "line " + std::to_string(ln.from_bus) + "-" + std::to_string(ln.to_bus);
    if (ln.from_bus == ln.to_bus)
      throw ValidationError(tag + ": from and to bus are the same");
    if (!has_bus(ln.from_bus))
      throw ValidationError(tag + ": unknown bus " + std::to_string(ln.from_bus));
    if (!has_bus(ln.to_bus))
      throw ValidationError(tag + ": unknown bus " + std::to_string(ln.to_bus));
    if ((ln.z - ln.z.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + ln.z.cwiseAbs().maxCoeff()))
      throw ValidationError(tag + ": impedance block not symmetric");
    const PhaseMask lp = ln.phases();
    if (!lp.any()) throw ValidationError(tag + ": no phases (zero impedance block)");
    const PhaseMask& fp = buses_[bus_index(ln.from_bus)].phases;
    const PhaseMask& tp = buses_[bus_index(ln.to_bus)].phases;
    for (Phase p : kAllPhases) {
      const int i = phase_index(p);
      if (lp.has(p) && (!fp.has(p) || !tp.has(p)))
        throw ValidationError(tag + ": carries phase " +
                              std::string(1, phase_label(p)) +
                              " absent at an endpoint bus");
      for (Phase q : kAllPhases) {
        const int j = phase_index(q);
        if ((!lp.has(p) || !lp.has(q)) && std::abs(ln.z(i, j)) > 0 && i != j)
          throw ValidationError(tag + ": mutual term on absent phase");
      }
    }
  }
  for (const CapacitorBank& cb : caps_) {
    if (!has_bus(cb.bus))
      throw ValidationError("capbank: unknown bus " + std::to_string(cb.bus));
    for (Phase p : kAllPhases) {
      if (cb.q_max[phase_index(p)] < 0)
        throw ValidationError("capbank at bus " + std::to_string(cb.bus) +
                              ": negative capacity");
      if (cb.q_max[phase_index(p)] > 0 &&
          !buses_[bus_index(cb.bus)].phases.has(p))
        throw ValidationError("capbank at bus " + std::to_string(cb.bus) +
                              ": capacity on absent phase " +
                              std::string(1, phase_label(p)));
    }
  }
}

void NetworkModel::build_topology() {
  const int n = num_buses();
  lines_at_.assign(n, {});
  for (int e = 0; e < num_lines(); ++e) {
    lines_at_[bus_index(lines_[e].from_bus)].push_back(e);
    lines_at_[bus_index(lines_[e].to_bus)].push_back(e);
  }
  // BFS from the slack; also detects disconnection.
  parent_line_.assign(n, -1);
  bfs_order_.clear();
  std::vector<bool> seen(n, false);
  std::deque<int> queue{slack_index_};
  seen[slack_index_] = true;
  while (!queue.empty()) {
    const int j = queue.front();
    queue.pop_front();
    bfs_order_.push_back(j);
    for (int e : lines_at_[j]) {
      const int other = bus_index(lines_[e].from_bus) == j
                            ? bus_index(lines_[e].to_bus)
                            : bus_index(lines_[e].from_bus);
      if (!seen[other]) {
        seen[other] = true;
        parent_line_[other] = e;
        queue.push_back(other);
      }
    }
  }
  if (static_cast<int>(bfs_order_.size()) != n) {
    for (int j = 0; j < n; ++j)
      if (!seen[j])
        throw ValidationError("network is disconnected: bus " +
                              std::to_string(buses_[j].id) +
                              " unreachable from the slack");
  }
}

Eigen::SparseMatrix<double> build_incidence(const NetworkModel& net) {
  const int rows = 3 * net.num_lines();
  const int cols = 3 * net.num_buses();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * rows);
  for (int e = 0; e < net.num_lines(); ++e) {
    const Line& ln = net.lines()[e];
    const int fi = net.bus_index(ln.from_bus);
    const int ti = net.bus_index(ln.to_bus);
    const PhaseMask lp = ln.phases();
    for (Phase p : kAllPhases) {
      if (!lp.has(p)) continue;  // absent phase: all-zero row
      const int i = phase_index(p);
      trip.emplace_back(3 * e + i, 3 * fi + i, +1.0);
      trip.emplace_back(3 * e + i, 3 * ti + i, -1.0);
    }
  }
  Eigen::SparseMatrix<double> a(rows, cols);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

Eigen::SparseMatrix<Complex> build_branch_impedance(const NetworkModel& net) {
  const int dim = 3 * net.num_lines();
  std::vector<Eigen::Triplet<Complex>> trip;
  for (int e = 0; e < net.num_lines(); ++e) {
    const Line& ln = net.lines()[e];
    const PhaseMask lp = ln.phases();
    for (Phase p : kAllPhases) {
      if (lp.has(p) && std::abs(ln.z(phase_index(p), phase_index(p))) == 0.0)
        throw ValidationError("line " + std::to_string(ln.from_bus) + "-" +
                              std::to_string(ln.to_bus) +
                              ": singular diagonal for present phase " +
                              std::string(1, phase_label(p)));
      for (Phase q : kAllPhases) {
        const Complex z = ln.z(phase_index(p), phase_index(q));
        if (z != Complex{0.0, 0.0})
          trip.emplace_back(3 * e + phase_index(p), 3 * e + phase_index(q), z);
      }
    }
  }
  Eigen::SparseMatrix<Complex> z(dim, dim);
  z.setFromTriplets(trip.begin(), trip.end());
  return z;
}

}  // namespace dqm
