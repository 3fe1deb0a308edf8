#include "dqm/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "dqm/csv.hpp"

namespace dqm {

namespace {
std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

const std::vector<std::string> kKnownKeys = {
    "paths.feeder", "paths.devices", "paths.output",
    "scenario.days", "scenario.slots_per_day", "scenario.pf_min",
    "scenario.penetration", "scenario.max_cluster_nodes",
    "scenario.cluster_min_kw", "scenario.cluster_max_kw", "scenario.dg_bid",
    "scenario.seed", "scenario.workers",
    "profiles.pv_csv", "profiles.load_csv", "profiles.lambda_csv",
    "opf.zeta", "opf.lambda_ref", "opf.slack_limit",
    "opf.angle_halfwidth_deg", "opf.tighten_rounds",
    "market.method", "market.refine_passes", "market.refine_shrink",
    "market.refine_floor", "market.gap_target",
    "solver.tol", "solver.max_iters",
    "pac.rho", "pac.gamma", "pac.max_iters", "pac.tol_feas", "pac.tol_coord",
    "sweep.axis", "sweep.pf_values", "sweep.penetration_values",
    "debug.export_qp_json",
};
}  // namespace

ConfigFile::ConfigFile(const std::string& path) : path_(path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError(path + ":" + std::to_string(lineno) +
                              ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": empty key or value");
    values_[section + "." + key] = value;
  }
}

bool ConfigFile::has(const std::string& s, const std::string& k) const {
  return values_.count(s + "." + k) > 0;
}

double ConfigFile::num(const std::string& s, const std::string& k, double dflt) const {
  auto it = values_.find(s + "." + k);
  if (it == values_.end()) return dflt;
  return csv::to_double(it->second, path_ + ": " + s + "." + k);
}

int ConfigFile::integer(const std::string& s, const std::string& k, int dflt) const {
  auto it = values_.find(s + "." + k);
  if (it == values_.end()) return dflt;
  return csv::to_int(it->second, path_ + ": " + s + "." + k);
}

std::string ConfigFile::str(const std::string& s, const std::string& k,
                            const std::string& dflt) const {
  auto it = values_.find(s + "." + k);
  if (it == values_.end()) return dflt;
  std::string v = it->second;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
    return v.substr(1, v.size() - 2);
  return v;
}

bool ConfigFile::boolean(const std::string& s, const std::string& k, bool dflt) const {
  auto it = values_.find(s + "." + k);
  if (it == values_.end()) return dflt;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw ValidationError(path_ + ": " + s + "." + k + ": expected true/false");
}

std::vector<double> ConfigFile::array(const std::string& s, const std::string& k,
                                      const std::vector<double>& dflt) const {
  auto it = values_.find(s + "." + k);
  if (it == values_.end()) return dflt;
  std::string v = it->second;
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw ValidationError(path_ + ": " + s + "." + k + ": expected [a, b, ...]");
  v = v.substr(1, v.size() - 2);
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(csv::to_double(item, path_ + ": " + s + "." + k));
  }
  return out;
}

std::vector<std::string> ConfigFile::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

RunConfig load_run_config(const std::string& path) {
  ConfigFile cf(path);
  for (const std::string& k : cf.keys()) {
    bool known = false;
    for (const std::string& kk : kKnownKeys)
      if (k == kk) known = true;
    if (!known) throw ValidationError(path + ": unknown key " + k);
  }

  RunConfig rc;
  rc.config_path = path;
  ScenarioConfig& sc = rc.scenario;
  sc.feeder_path = cf.str("paths", "feeder", "");
  sc.devices_path = cf.str("paths", "devices", "");
  rc.output_dir = cf.str("paths", "output", "out");
  if (sc.feeder_path.empty())
    throw ValidationError(path + ": paths.feeder is required");
  if (sc.devices_path.empty())
    throw ValidationError(path + ": paths.devices is required");
  if (!std::ifstream(sc.feeder_path))
    throw ValidationError(path + ": feeder file not found: " + sc.feeder_path);
  if (!std::ifstream(sc.devices_path))
    throw ValidationError(path + ": devices file not found: " + sc.devices_path);

  sc.days = cf.integer("scenario", "days", 1);
  sc.slots_per_day = cf.integer("scenario", "slots_per_day", 288);
  sc.pf_min = cf.num("scenario", "pf_min", 0.9);
  sc.target_penetration = cf.num("scenario", "penetration", 1.2);
  sc.max_cluster_nodes = cf.integer("scenario", "max_cluster_nodes", 27);
  sc.cluster_min_kw = cf.num("scenario", "cluster_min_kw", 25.0);
  sc.cluster_max_kw = cf.num("scenario", "cluster_max_kw", 80.0);
  sc.dg_bid = cf.num("scenario", "dg_bid", 10.0);
  sc.seed = static_cast<std::uint64_t>(cf.num("scenario", "seed", 1));
  sc.workers = cf.integer("scenario", "workers", 1);
  sc.pv_profile_csv = cf.str("profiles", "pv_csv", "");
  sc.load_profile_csv = cf.str("profiles", "load_csv", "");
  sc.lambda_profile_csv = cf.str("profiles", "lambda_csv", "");

  MarketOptions& mo = sc.market;
  mo.opf.zeta = cf.num("opf", "zeta", 0.1);
  mo.opf.lambda_ref = cf.num("opf", "lambda_ref", 50.0);
  mo.opf.slack_limit = cf.num("opf", "slack_limit", 10.0);
  mo.bounds.angle_halfwidth_deg = cf.num("opf", "angle_halfwidth_deg", 10.0);
  mo.bounds.rounds = cf.integer("opf", "tighten_rounds", 3);
  const std::string method = cf.str("market", "method", "centralized");
  if (method == "centralized")
    mo.method = SolveMethod::Centralized;
  else if (method == "pac")
    mo.method = SolveMethod::Pac;
  else
    throw ValidationError(path + ": market.method must be centralized or pac");
  mo.refine_passes = cf.integer("market", "refine_passes", 2);
  mo.refine_shrink = cf.num("market", "refine_shrink", 0.3);
  mo.refine_floor = cf.num("market", "refine_floor", 1e-4);
  mo.gap_target = cf.num("market", "gap_target", 0.005);
  mo.solve.tol = cf.num("solver", "tol", 1e-9);
  mo.solve.max_iters = cf.integer("solver", "max_iters", 200);
  mo.pac.rho = cf.num("pac", "rho", 1.0);
  mo.pac.gamma = cf.num("pac", "gamma", 0.05);
  mo.pac.max_iters = cf.integer("pac", "max_iters", 20000);
  mo.pac.tol_feas = cf.num("pac", "tol_feas", 1e-6);
  mo.pac.tol_coord = cf.num("pac", "tol_coord", 1e-6);

  rc.sweep_axis = cf.str("sweep", "axis", "pf");
  if (rc.sweep_axis != "pf" && rc.sweep_axis != "penetration")
    throw ValidationError(path + ": sweep.axis must be pf or penetration");
  rc.pf_values = cf.array("sweep", "pf_values", rc.pf_values);
  rc.penetration_values =
      cf.array("sweep", "penetration_values", rc.penetration_values);
  rc.export_qp_json = cf.boolean("debug", "export_qp_json", false);
  return rc;
}

std::string fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open for hashing: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return fnv1a64(ss.str());
}

}  // namespace dqm
