#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "dqm/network.hpp"
#include "dqm/qp.hpp"

namespace dqm {

/// One node's slice of the QP. Variables are indices into the extended
/// variable space (original variables plus estimate copies); `owned` hold
/// original ids, estimates reference a variable owned by a neighbour atom.
struct Atom {
  int id = 0;
  std::vector<int> vars;        // extended ids, owned first then estimates
  int num_owned = 0;
  Eigen::MatrixXd M;            // dense local blocks (atoms are small)
  Eigen::VectorXd c;
  Eigen::MatrixXd G;
  Eigen::VectorXd b;
  Eigen::MatrixXd H;
  Eigen::VectorXd d;
  std::vector<int> eq_rows;     // original G row per local row
  std::vector<int> ineq_rows;   // original H row per local row

  /// Coordination structure: entries of B touching this atom's variables
  /// (for the primal update), and the rows this atom is responsible for
  /// updating (those whose estimate variable it holds).
  struct BEntry {
    int row;        // coordination row id
    int local_var;  // column in this atom's local numbering
    double coef;    // +1 estimate, -1 owned
  };
  std::vector<BEntry> b_entries;
  std::vector<int> assigned_rows;
};

/// Directed owner -> estimate coordination constraints, B x_ext = 0.
struct CoordinationGraph {
  Eigen::SparseMatrix<double> B;  // rows x n_ext
  struct Pair {
    int est_var;    // extended id of the estimate
    int owner_var;  // extended id (= original id) of the owned variable
    int holder;     // atom holding the estimate
  };
  std::vector<Pair> rows;
  int n_ext = 0;
};

struct AtomSystem {
  std::vector<Atom> atoms;
  CoordinationGraph graph;
  int n_original = 0;
  std::vector<int> owner_of_var;       // original var -> atom
  std::vector<int> original_of_ext;    // ext var -> original id (estimates too)
};

/// Splits the QP into one atom per bus. Flow variables belong to the
/// from-bus atom; branch voltage-drop rows stay with the from-bus atom which
/// estimates the to-bus voltage, and current-balance rows stay with their bus
/// which estimates incoming line flows. The union of atom-local constraints
/// plus coordination rows is equivalent to the original QP.
AtomSystem atomize(const StandardFormQP& qp, const NetworkModel& net);

/// Degenerate single-atom partition (empty coordination graph).
AtomSystem atomize_single(const StandardFormQP& qp);

}  // namespace dqm
