#include "dqm/devices.hpp"

#include <cmath>

#include "dqm/csv.hpp"

namespace dqm {

void DeviceSet::validate(const NetworkModel& net) const {
  for (const Generator& g : generators) {
    const std::string tag = "generator " + g.id + " at bus " + std::to_string(g.bus);
    if (!net.has_bus(g.bus)) throw ValidationError(tag + ": unknown bus");
    if (!g.phases.subset_of(net.buses()[net.bus_index(g.bus)].phases))
      throw ValidationError(tag + ": phase absent at bus");
    if (g.pf_min <= 0.0 || g.pf_min > 1.0)
      throw ValidationError(tag + ": pf_min must be in (0, 1]");
    if (g.cost_p_quad < 0 || g.cost_q_quad < 0)
      throw ValidationError(tag + ": quadratic cost must be >= 0");
    if (!std::isfinite(g.cost_p_lin) || !std::isfinite(g.cost_q_lin))
      throw ValidationError(tag + ": cost coefficients must be finite");
    for (int p = 0; p < 3; ++p) {
      if (g.p_min[p] > g.p_max[p] || g.q_min[p] > g.q_max[p])
        throw ValidationError(tag + ": bounds out of order");
      if (g.p_min[p] < 0)
        throw ValidationError(tag + ": negative p_min (generators inject)");
    }
  }
  for (const Load& l : loads) {
    const std::string tag = "load " + l.id + " at bus " + std::to_string(l.bus);
    if (!net.has_bus(l.bus)) throw ValidationError(tag + ": unknown bus");
    if (!net.buses()[net.bus_index(l.bus)].phases.has(l.phase))
      throw ValidationError(tag + ": phase " +
                            std::string(1, phase_label(l.phase)) +
                            " absent at bus");
    if (l.flexible && (l.p_lo > l.p_hi || l.q_lo > l.q_hi))
      throw ValidationError(tag + ": flexible bounds out of order");
    if (l.alpha_p < 0 || l.alpha_q < 0)
      throw ValidationError(tag + ": disutility coefficients must be >= 0");
  }
}

double DeviceSet::total_nameplate() const {
  double s = 0;
  for (const Generator& g : generators)
    for (int p = 0; p < 3; ++p) s += g.p_max[p];
  return s;
}

void PeriodInput::validate(const DeviceSet& devices) const {
  if (!std::isfinite(lambda_p))
    throw ValidationError("period input: lambda_p not finite");
  if (gen_avail.size() != devices.generators.size())
    throw ValidationError("period input: gen_avail size mismatch");
  if (load_scale.size() != devices.loads.size())
    throw ValidationError("period input: load_scale size mismatch");
  for (double a : gen_avail)
    if (a < 0) throw ValidationError("period input: negative availability");
  for (double s : load_scale)
    if (s < 0) throw ValidationError("period input: negative demand scale");
}

DeviceSet load_devices(const std::string& path, const NetworkModel& net) {
  DeviceSet ds;
  const double sb1 = net.base_kva_1ph();
  int lineno = 0;
  bool header_seen = false;
  for (const auto& f : csv::read_file(path)) {
    ++lineno;
    const std::string where = path + " record " + std::to_string(lineno);
    if (!header_seen && f[0] == "kind") {  // header row
      header_seen = true;
      continue;
    }
    if (f[0] == "gen") {
      // kind,id,bus,phases,p_max_kw,q_min_kvar,q_max_kvar,a_p,b_p,a_q,b_q,pf_min
      if (f.size() != 12) throw ValidationError(where + ": gen needs 11 fields");
      Generator g;
      g.id = f[1];
      g.bus = csv::to_int(f[2], where);
      g.phases = PhaseMask::parse(f[3]);
      const double p_max_kw = csv::to_double(f[4], where);
      const double q_min_kvar = csv::to_double(f[5], where);
      const double q_max_kvar = csv::to_double(f[6], where);
      const int nph = g.phases.count();
      for (Phase p : kAllPhases) {
        if (!g.phases.has(p)) continue;
        const int i = phase_index(p);
        g.p_max[i] = p_max_kw / nph / sb1;
        g.q_min[i] = q_min_kvar / nph / sb1;
        g.q_max[i] = q_max_kvar / nph / sb1;
      }
      g.cost_p_quad = csv::to_double(f[7], where);
      g.cost_p_lin = csv::to_double(f[8], where);
      g.cost_q_quad = csv::to_double(f[9], where);
      g.cost_q_lin = f[10].empty() ? -1.0 : csv::to_double(f[10], where);
      g.pf_min = csv::to_double(f[11], where);
      ds.generators.push_back(g);
    } else if (f[0] == "load") {
      // kind,id,bus,phase,p_kw,q_kvar[,alpha_p,alpha_q,p_lo_kw,p_hi_kw,q_lo_kvar,q_hi_kvar]
      if (f.size() != 6 && f.size() != 12)
        throw ValidationError(where + ": load needs 5 or 11 fields");
      Load l;
      l.id = f[1];
      l.bus = csv::to_int(f[2], where);
      const PhaseMask pm = PhaseMask::parse(f[3]);
      if (pm.count() != 1)
        throw ValidationError(where + ": load records are per single phase");
      for (Phase p : kAllPhases)
        if (pm.has(p)) l.phase = p;
      l.p = csv::to_double(f[4], where) / sb1;
      l.q = csv::to_double(f[5], where) / sb1;
      if (f.size() == 12) {
        l.alpha_p = csv::to_double(f[6], where);
        l.alpha_q = csv::to_double(f[7], where);
        l.flexible = true;
        l.p_lo = csv::to_double(f[8], where) / sb1;
        l.p_hi = csv::to_double(f[9], where) / sb1;
        l.q_lo = csv::to_double(f[10], where) / sb1;
        l.q_hi = csv::to_double(f[11], where) / sb1;
      }
      ds.loads.push_back(l);
    } else {
      throw ValidationError(where + ": unknown record kind \"" + f[0] + "\"");
    }
  }
  ds.validate(net);
  return ds;
}

}  // namespace dqm
