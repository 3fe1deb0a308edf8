#include "dqm/atoms.hpp"

#include <map>

namespace dqm {

namespace {

struct RowEntries {
  std::vector<std::pair<int, double>> entries;  // (original var, coef)
};

std::vector<RowEntries> row_list(const Eigen::SparseMatrix<double>& m) {
  std::vector<RowEntries> rows(m.rows());
  Eigen::SparseMatrix<double, Eigen::RowMajor> rm(m);
  for (int r = 0; r < rm.rows(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rm, r); it; ++it)
      if (it.value() != 0.0) rows[r].entries.emplace_back(it.col(), it.value());
  return rows;
}

}  // namespace

AtomSystem atomize(const StandardFormQP& qp, const NetworkModel& net) {
  AtomSystem sys;
  sys.n_original = qp.n;
  const int natoms = net.num_buses();

  // Variable ownership comes from the index map: every variable carries the
  // bus it belongs to (flows belong to their from-bus).
  sys.owner_of_var.assign(qp.n, -1);
  for (int v = 0; v < qp.n; ++v) {
    sys.owner_of_var[v] = qp.var_keys[v].bus;
    if (sys.owner_of_var[v] < 0 || sys.owner_of_var[v] >= natoms)
      throw ValidationError("atomize: orphan variable " + std::to_string(v) +
                            " (" + sym_name(qp.var_keys[v].sym) + ")");
  }

  // Extended variable space: originals plus estimates created on demand when
  // a constraint row reaches across atoms.
  sys.original_of_ext.resize(qp.n);
  for (int v = 0; v < qp.n; ++v) sys.original_of_ext[v] = v;
  std::map<std::pair<int, int>, int> estimate_of;  // (atom, original var) -> ext id
  std::vector<std::vector<int>> atom_vars(natoms);  // owned, then estimates
  std::vector<std::vector<int>> atom_owned(natoms);
  for (int v = 0; v < qp.n; ++v) atom_owned[sys.owner_of_var[v]].push_back(v);

  auto estimate_var = [&](int atom, int var) {
    auto it = estimate_of.find({atom, var});
    if (it != estimate_of.end()) return it->second;
    const int ext = static_cast<int>(sys.original_of_ext.size());
    sys.original_of_ext.push_back(var);
    estimate_of[{atom, var}] = ext;
    return ext;
  };

  // Home atom of each equality row.
  const auto grows = row_list(qp.G);
  std::vector<int> eq_atom(qp.G.rows(), -1);
  for (int r = 0; r < qp.G.rows(); ++r) {
    const RowKey& k = qp.eq_keys[r];
    switch (k.cls) {
      case RowClass::Ohm:
        eq_atom[r] = net.bus_index(net.lines()[k.idx].from_bus);
        break;
      case RowClass::Kcl:
      case RowClass::PDef:
      case RowClass::QDef:
      case RowClass::BalP:
      case RowClass::BalQ:
      case RowClass::PinV:
        eq_atom[r] = k.idx;
        break;
      case RowClass::FixVar:
      case RowClass::EnvEq:
        eq_atom[r] = sys.owner_of_var[grows[r].entries.front().first];
        break;
    }
  }
  // Inequality rows are single-bus by construction.
  const auto hrows = row_list(qp.H);
  std::vector<int> ineq_atom(qp.H.rows(), -1);
  for (int r = 0; r < qp.H.rows(); ++r)
    ineq_atom[r] = sys.owner_of_var[hrows[r].entries.front().first];

  // Localize rows, inserting estimates for foreign variables. Equality rows
  // may reach one bus over (branch physics); inequality rows must not.
  struct LocalRow {
    std::vector<std::pair<int, double>> entries;  // (ext var, coef)
    double rhs;
    int original;
  };
  std::vector<std::vector<LocalRow>> eq_local(natoms), ineq_local(natoms);
  for (int r = 0; r < qp.G.rows(); ++r) {
    LocalRow lr;
    lr.rhs = qp.b[r];
    lr.original = r;
    for (auto [v, a] : grows[r].entries) {
      const int home = sys.owner_of_var[v];
      lr.entries.emplace_back(home == eq_atom[r] ? v : estimate_var(eq_atom[r], v), a);
    }
    eq_local[eq_atom[r]].push_back(std::move(lr));
  }
  for (int r = 0; r < qp.H.rows(); ++r) {
    LocalRow lr;
    lr.rhs = qp.d[r];
    lr.original = r;
    for (auto [v, a] : hrows[r].entries) {
      if (sys.owner_of_var[v] != ineq_atom[r])
        throw ValidationError("atomize: inequality row " + std::to_string(r) +
                              " spans more than one atom");
      lr.entries.emplace_back(v, a);
    }
    ineq_local[ineq_atom[r]].push_back(std::move(lr));
  }

  // Per-atom variable lists: owned in original order, then this atom's
  // estimates ordered by the estimated variable id.
  std::vector<std::vector<std::pair<int, int>>> atom_estimates(natoms);
  for (const auto& [key, ext] : estimate_of)
    atom_estimates[key.first].emplace_back(key.second, ext);  // sorted by map key
  std::vector<int> local_of_ext(sys.original_of_ext.size(), -1);
  for (int a = 0; a < natoms; ++a) {
    atom_vars[a] = atom_owned[a];
    for (auto& [ovar, ext] : atom_estimates[a]) atom_vars[a].push_back(ext);
  }

  sys.graph.n_ext = static_cast<int>(sys.original_of_ext.size());

  // Coordination rows: estimate - owned = 0, held by the estimating atom.
  std::vector<Eigen::Triplet<double>> bt;
  for (int a = 0; a < natoms; ++a)
    for (auto& [ovar, ext] : atom_estimates[a]) {
      const int row = static_cast<int>(sys.graph.rows.size());
      sys.graph.rows.push_back({ext, ovar, a});
      bt.emplace_back(row, ext, +1.0);
      bt.emplace_back(row, ovar, -1.0);
    }
  sys.graph.B.resize(static_cast<int>(sys.graph.rows.size()), sys.graph.n_ext);
  sys.graph.B.setFromTriplets(bt.begin(), bt.end());

  // Assemble atoms.
  Eigen::SparseMatrix<double, Eigen::RowMajor> mrow(qp.M);
  sys.atoms.resize(natoms);
  for (int a = 0; a < natoms; ++a) {
    Atom& at = sys.atoms[a];
    at.id = a;
    at.vars = atom_vars[a];
    at.num_owned = static_cast<int>(atom_owned[a].size());
    const int nv = static_cast<int>(at.vars.size());
    for (int i = 0; i < nv; ++i) local_of_ext[at.vars[i]] = i;

    at.M = Eigen::MatrixXd::Zero(nv, nv);
    at.c = Eigen::VectorXd::Zero(nv);
    for (int i = 0; i < at.num_owned; ++i) {
      const int v = at.vars[i];
      at.c[i] = qp.c[v];
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mrow, v); it; ++it) {
        if (it.value() == 0.0) continue;
        if (sys.owner_of_var[it.col()] != a)
          throw ValidationError("atomize: objective couples variables across atoms");
        at.M(i, local_of_ext[it.col()]) += it.value();
      }
    }

    at.G = Eigen::MatrixXd::Zero(static_cast<int>(eq_local[a].size()), nv);
    at.b = Eigen::VectorXd::Zero(at.G.rows());
    for (size_t r = 0; r < eq_local[a].size(); ++r) {
      for (auto [ev, coef] : eq_local[a][r].entries)
        at.G(static_cast<int>(r), local_of_ext[ev]) += coef;
      at.b[static_cast<int>(r)] = eq_local[a][r].rhs;
      at.eq_rows.push_back(eq_local[a][r].original);
    }
    at.H = Eigen::MatrixXd::Zero(static_cast<int>(ineq_local[a].size()), nv);
    at.d = Eigen::VectorXd::Zero(at.H.rows());
    for (size_t r = 0; r < ineq_local[a].size(); ++r) {
      for (auto [ev, coef] : ineq_local[a][r].entries)
        at.H(static_cast<int>(r), local_of_ext[ev]) += coef;
      at.d[static_cast<int>(r)] = ineq_local[a][r].rhs;
      at.ineq_rows.push_back(ineq_local[a][r].original);
    }
  }

  // Coordination entries per atom (for B' nu terms and residuals).
  for (int r = 0; r < static_cast<int>(sys.graph.rows.size()); ++r) {
    const auto& pr = sys.graph.rows[r];
    Atom& holder = sys.atoms[pr.holder];
    // local index of the estimate within its holder
    for (int i = holder.num_owned; i < static_cast<int>(holder.vars.size()); ++i)
      if (holder.vars[i] == pr.est_var) {
        holder.b_entries.push_back({r, i, +1.0});
        break;
      }
    holder.assigned_rows.push_back(r);
    Atom& owner = sys.atoms[sys.owner_of_var[pr.owner_var]];
    for (int i = 0; i < owner.num_owned; ++i)
      if (owner.vars[i] == pr.owner_var) {
        owner.b_entries.push_back({r, i, -1.0});
        break;
      }
  }
  return sys;
}

AtomSystem atomize_single(const StandardFormQP& qp) {
  AtomSystem sys;
  sys.n_original = qp.n;
  sys.owner_of_var.assign(qp.n, 0);
  sys.original_of_ext.resize(qp.n);
  for (int v = 0; v < qp.n; ++v) sys.original_of_ext[v] = v;
  Atom a;
  a.id = 0;
  a.vars.resize(qp.n);
  for (int v = 0; v < qp.n; ++v) a.vars[v] = v;
  a.num_owned = qp.n;
  a.M = Eigen::MatrixXd(qp.M);
  a.c = qp.c;
  a.G = Eigen::MatrixXd(qp.G);
  a.b = qp.b;
  a.H = Eigen::MatrixXd(qp.H);
  a.d = qp.d;
  a.eq_rows.resize(qp.G.rows());
  for (int r = 0; r < qp.G.rows(); ++r) a.eq_rows[r] = r;
  a.ineq_rows.resize(qp.H.rows());
  for (int r = 0; r < qp.H.rows(); ++r) a.ineq_rows[r] = r;
  sys.atoms.push_back(std::move(a));
  sys.graph.B.resize(0, qp.n);
  sys.graph.n_ext = qp.n;
  return sys;
}

}  // namespace dqm
