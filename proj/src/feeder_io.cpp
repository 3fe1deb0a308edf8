#include "dqm/feeder_io.hpp"

#include <fstream>

#include <json.hpp>

#include "dqm/csv.hpp"

namespace dqm {

namespace {

// Upper-triangle order used by line records: aa, ab, ac, bb, bc, cc.
constexpr int kTri[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};

struct RawFeeder {
  double base_kva = 0, base_kv_ll = 0;
  std::vector<Bus> buses;
  std::vector<Line> lines;           // impedances still in ohms
  std::vector<CapacitorBank> caps;   // capacities still in kvar
};

NetworkModel finish(RawFeeder raw) {
  if (raw.base_kva <= 0 || raw.base_kv_ll <= 0)
    throw ValidationError("feeder file: missing or invalid base record");
  const double zb = raw.base_kv_ll * raw.base_kv_ll * 1000.0 / raw.base_kva;
  const double sb1 = raw.base_kva / 3.0;
  const double ib_amps = sb1 / (raw.base_kv_ll / std::sqrt(3.0));
  for (Line& ln : raw.lines) {
    ln.z /= zb;
    for (double& a : ln.ampacity) a /= ib_amps;
  }
  for (CapacitorBank& cb : raw.caps)
    for (double& q : cb.q_max) q /= sb1;
  return NetworkModel(std::move(raw.buses), std::move(raw.lines),
                      std::move(raw.caps), raw.base_kva, raw.base_kv_ll);
}

RawFeeder parse_csv(const std::string& path) {
  RawFeeder raw;
  int lineno = 0;
  for (const auto& f : csv::read_file(path)) {
    ++lineno;
    const std::string where = path + " record " + std::to_string(lineno);
    const std::string& kind = f[0];
    if (kind == "base") {
      if (f.size() != 3) throw ValidationError(where + ": base needs 2 fields");
      raw.base_kva = csv::to_double(f[1], where);
      raw.base_kv_ll = csv::to_double(f[2], where);
    } else if (kind == "bus") {
      if (f.size() != 6) throw ValidationError(where + ": bus needs 5 fields");
      Bus b;
      b.id = csv::to_int(f[1], where);
      b.phases = PhaseMask::parse(f[2]);
      b.is_slack = csv::to_int(f[3], where) != 0;
      b.vmin = csv::to_double(f[4], where);
      b.vmax = csv::to_double(f[5], where);
      raw.buses.push_back(b);
    } else if (kind == "line") {
      if (f.size() != 19) throw ValidationError(where + ": line needs 18 fields");
      Line ln;
      ln.from_bus = csv::to_int(f[1], where);
      ln.to_bus = csv::to_int(f[2], where);
      ln.length = csv::to_double(f[3], where);
      ln.z.setZero();
      for (int k = 0; k < 6; ++k) {
        const double r = csv::to_double(f[4 + k], where);
        const double x = csv::to_double(f[10 + k], where);
        ln.z(kTri[k][0], kTri[k][1]) = Complex(r, x);
        ln.z(kTri[k][1], kTri[k][0]) = Complex(r, x);
      }
      for (int p = 0; p < 3; ++p)
        ln.ampacity[p] = csv::to_double(f[16 + p], where);
      raw.lines.push_back(ln);
    } else if (kind == "capbank") {
      if (f.size() != 5) throw ValidationError(where + ": capbank needs 4 fields");
      CapacitorBank cb;
      cb.bus = csv::to_int(f[1], where);
      for (int p = 0; p < 3; ++p)
        cb.q_max[p] = csv::to_double(f[2 + p], where);
      raw.caps.push_back(cb);
    } else {
      throw ValidationError(where + ": unknown record kind \"" + kind + "\"");
    }
  }
  return raw;
}

RawFeeder parse_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError(path + ": JSON parse error: " + e.what());
  }
  RawFeeder raw;
  raw.base_kva = j.at("base_kva").get<double>();
  raw.base_kv_ll = j.at("base_kv_ll").get<double>();
  for (const auto& jb : j.at("buses")) {
    Bus b;
    b.id = jb.at("id").get<int>();
    b.phases = PhaseMask::parse(jb.at("phases").get<std::string>());
    b.is_slack = jb.value("slack", false);
    b.vmin = jb.value("vmin", 0.95);
    b.vmax = jb.value("vmax", 1.05);
    raw.buses.push_back(b);
  }
  for (const auto& jl : j.at("lines")) {
    Line ln;
    ln.from_bus = jl.at("from").get<int>();
    ln.to_bus = jl.at("to").get<int>();
    ln.length = jl.value("length", 0.0);
    ln.z.setZero();
    const auto& r = jl.at("r_ohm");  // upper triangle aa,ab,ac,bb,bc,cc
    const auto& x = jl.at("x_ohm");
    if (r.size() != 6 || x.size() != 6)
      throw ValidationError(path + ": line " + std::to_string(ln.from_bus) +
                            "-" + std::to_string(ln.to_bus) +
                            ": r_ohm/x_ohm need 6 entries");
    for (int k = 0; k < 6; ++k) {
      const Complex z(r[k].get<double>(), x[k].get<double>());
      ln.z(kTri[k][0], kTri[k][1]) = z;
      ln.z(kTri[k][1], kTri[k][0]) = z;
    }
    if (jl.contains("ampacity"))
      for (int p = 0; p < 3; ++p) ln.ampacity[p] = jl["ampacity"][p].get<double>();
    raw.lines.push_back(ln);
  }
  if (j.contains("capbanks")) {
    for (const auto& jc : j["capbanks"]) {
      CapacitorBank cb;
      cb.bus = jc.at("bus").get<int>();
      for (int p = 0; p < 3; ++p) cb.q_max[p] = jc.at("q_kvar")[p].get<double>();
      raw.caps.push_back(cb);
    }
  }
  return raw;
}

}  // namespace

NetworkModel load_network(const std::string& path) {
  const bool json = path.size() > 5 && path.substr(path.size() - 5) == ".json";
  return finish(json ? parse_json(path) : parse_csv(path));
}

}  // namespace dqm
