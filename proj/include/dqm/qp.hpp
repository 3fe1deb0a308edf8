#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "dqm/common.hpp"

namespace dqm {

/// Physical meaning of a QP variable.
enum class Sym : int {
  IR = 0, II, VR, VI, P, Q,        // nodal, per bus-phase
  WVRIR, WVIII, WVRII, WVIIR,      // bilinear product variables, per bus-phase
  IFR, IFI,                        // branch flow, per line-phase
  GenP, GenQ,                      // generator device, per generator-phase
  LoadP, LoadQ,                    // load device, per load record
  CapQ,                            // capacitor bank, per bank-phase
  SlackP, SlackQ,                  // transmission import, per slack-bus phase
};

const char* sym_name(Sym s);

struct VarKey {
  Sym sym = Sym::IR;
  int idx = 0;   // bus, line, generator, load, or bank index per sym
  Phase ph = Phase::A;
  int bus = -1;  // owning bus index (from-bus for flow variables)
};

/// Classes of equality rows; PDef/QDef rows carry the nodal prices.
enum class RowClass : int {
  PinV = 0,   // slack voltage component pin
  FixVar,     // variable fixed by construction (absent phase, fixed load)
  Ohm,        // branch voltage drop (Eq. 2a style)
  Kcl,        // nodal current balance (Eq. 2b style)
  PDef,       // real power definition, dual = real price
  QDef,       // reactive power definition, dual = reactive price
  BalP,       // device balance, real
  BalQ,       // device balance, reactive
  EnvEq,      // degenerate McCormick cell pinned to the exact line
};

struct RowKey {
  RowClass cls = RowClass::FixVar;
  int idx = 0;       // bus or line index
  Phase ph = Phase::A;
  bool imag = false; // imaginary component row (Ohm/Kcl)
};

/// Classes of inequality rows (diagnostics only).
enum class IneqClass : int {
  Envelope = 0,
  PfCone,
  BoundLo,
  BoundHi,
};

/// min 1/2 x'Mx + c'x  s.t.  Gx = b, Hx <= d. Variable boxes are encoded as
/// single-entry H rows; solvers may detect and treat them natively.
struct StandardFormQP {
  int n = 0;
  Eigen::SparseMatrix<double> M;  // symmetric PSD
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd b;
  Eigen::SparseMatrix<double> H;
  Eigen::VectorXd d;
  double obj_offset = 0.0;

  std::vector<VarKey> var_keys;          // size n
  std::vector<RowKey> eq_keys;           // size G.rows()
  std::vector<IneqClass> ineq_classes;   // size H.rows()

  /// Lookup tables populated by the builder; -1 where a variable or row does
  /// not exist (absent phase, no such device).
  std::vector<std::array<std::array<int, 10>, 3>> nodal;   // [bus][phase][Sym 0..9]
  std::vector<std::array<std::array<int, 2>, 3>> flow;     // [line][phase][IFR, IFI]
  std::vector<std::array<std::array<int, 2>, 3>> gen;      // [gen][phase][GenP, GenQ]
  std::vector<std::array<int, 2>> load;                    // [load][LoadP, LoadQ]
  std::vector<std::array<int, 3>> cap;                     // [bank][phase]
  std::array<std::array<int, 2>, 3> slack{};               // [phase][SlackP, SlackQ]
  std::vector<std::array<std::array<int, 2>, 3>> def_row;  // [bus][phase][PDef, QDef]

  int var(Sym s, int idx, Phase ph) const;
  int pdef_row(int bus, Phase ph) const { return def_row[bus][phase_index(ph)][0]; }
  int qdef_row(int bus, Phase ph) const { return def_row[bus][phase_index(ph)][1]; }

  double objective(const Eigen::VectorXd& x) const;

  /// Residual diagnostics for a candidate point.
  double eq_residual(const Eigen::VectorXd& x) const;     // ||Gx - b||_inf
  double ineq_residual(const Eigen::VectorXd& x) const;   // ||(Hx - d)+||_inf

  std::string to_json() const;
};

}  // namespace dqm
