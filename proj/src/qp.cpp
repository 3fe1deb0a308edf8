#include "dqm/qp.hpp"

#include <json.hpp>

namespace dqm {

const char* sym_name(Sym s) {
  switch (s) {
    case Sym::IR: return "IR";
    case Sym::II: return "II";
    case Sym::VR: return "VR";
    case Sym::VI: return "VI";
    case Sym::P: return "P";
    case Sym::Q: return "Q";
    case Sym::WVRIR: return "w_vr_ir";
    case Sym::WVIII: return "w_vi_ii";
    case Sym::WVRII: return "w_vr_ii";
    case Sym::WVIIR: return "w_vi_ir";
    case Sym::IFR: return "IFR";
    case Sym::IFI: return "IFI";
    case Sym::GenP: return "gen_p";
    case Sym::GenQ: return "gen_q";
    case Sym::LoadP: return "load_p";
    case Sym::LoadQ: return "load_q";
    case Sym::CapQ: return "cap_q";
    case Sym::SlackP: return "slack_p";
    case Sym::SlackQ: return "slack_q";
  }
  return "?";
}

int StandardFormQP::var(Sym s, int idx, Phase ph) const {
  const int p = phase_index(ph);
  const int si = static_cast<int>(s);
  switch (s) {
    case Sym::IR: case Sym::II: case Sym::VR: case Sym::VI:
    case Sym::P: case Sym::Q:
    case Sym::WVRIR: case Sym::WVIII: case Sym::WVRII: case Sym::WVIIR:
      return nodal[idx][p][si];
    case Sym::IFR: return flow[idx][p][0];
    case Sym::IFI: return flow[idx][p][1];
    case Sym::GenP: return gen[idx][p][0];
    case Sym::GenQ: return gen[idx][p][1];
    case Sym::LoadP: return load[idx][0];
    case Sym::LoadQ: return load[idx][1];
    case Sym::CapQ: return cap[idx][p];
    case Sym::SlackP: return slack[p][0];
    case Sym::SlackQ: return slack[p][1];
  }
  return -1;
}

double StandardFormQP::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(M * x) + c.dot(x) + obj_offset;
}

double StandardFormQP::eq_residual(const Eigen::VectorXd& x) const {
  if (G.rows() == 0) return 0.0;
  return (G * x - b).cwiseAbs().maxCoeff();
}

double StandardFormQP::ineq_residual(const Eigen::VectorXd& x) const {
  if (H.rows() == 0) return 0.0;
  return (H * x - d).cwiseMax(0.0).maxCoeff();
}

std::string StandardFormQP::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  auto sparse_to_json = [](const Eigen::SparseMatrix<double>& m) {
    nlohmann::json out;
    out["rows"] = m.rows();
    out["cols"] = m.cols();
    nlohmann::json entries = nlohmann::json::array();
    for (int k = 0; k < m.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
        entries.push_back({it.row(), it.col(), it.value()});
    out["entries"] = entries;
    return out;
  };
  j["M"] = sparse_to_json(M);
  j["G"] = sparse_to_json(G);
  j["H"] = sparse_to_json(H);
  j["c"] = std::vector<double>(c.data(), c.data() + c.size());
  j["b"] = std::vector<double>(b.data(), b.data() + b.size());
  j["d"] = std::vector<double>(d.data(), d.data() + d.size());
  j["obj_offset"] = obj_offset;
  nlohmann::json vars = nlohmann::json::array();
  for (const VarKey& k : var_keys)
    vars.push_back({sym_name(k.sym), k.idx, std::string(1, phase_label(k.ph))});
  j["index_map"] = vars;
  nlohmann::json rows = nlohmann::json::array();
  for (const RowKey& k : eq_keys)
    rows.push_back({static_cast<int>(k.cls), k.idx,
                    std::string(1, phase_label(k.ph)), k.imag});
  j["eq_rows"] = rows;
  return j.dump();
}

}  // namespace dqm
