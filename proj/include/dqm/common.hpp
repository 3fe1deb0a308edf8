#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dqm {

using Complex = std::complex<double>;

/// Phase labels of the three-phase system. Ordering a < b < c is fixed and
/// used everywhere a 3-block index appears.
enum class Phase : int { A = 0, B = 1, C = 2 };

inline constexpr int kNumPhases = 3;
inline constexpr std::array<Phase, 3> kAllPhases{Phase::A, Phase::B, Phase::C};

inline int phase_index(Phase p) { return static_cast<int>(p); }

inline char phase_label(Phase p) {
  switch (p) {
    case Phase::A: return 'a';
    case Phase::B: return 'b';
    case Phase::C: return 'c';
  }
  return '?';
}

/// Nominal phase angle in radians (a = 0, b = -120 deg, c = +120 deg).
double phase_angle(Phase p);

/// Balanced unit phasor for a phase.
Complex phase_unit(Phase p);

/// Mask over the three phases, e.g. which phases exist at a bus.
struct PhaseMask {
  std::array<bool, 3> on{false, false, false};

  bool has(Phase p) const { return on[phase_index(p)]; }
  void set(Phase p, bool v = true) { on[phase_index(p)] = v; }
  int count() const { return static_cast<int>(on[0]) + on[1] + on[2]; }
  bool any() const { return on[0] || on[1] || on[2]; }
  bool subset_of(const PhaseMask& other) const {
    for (int i = 0; i < 3; ++i)
      if (on[i] && !other.on[i]) return false;
    return true;
  }
  std::string str() const;
  /// Parses strings like "abc", "a", "bc". Throws on anything else.
  static PhaseMask parse(const std::string& s);
};

/// Error for malformed or inconsistent input data. Carries a message that
/// names the offending record.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Error raised by solvers (non-convergence, singularity, infeasibility).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Runs fn(i) for i in [0, n) on `workers` threads with a block partition.
/// Each index is processed exactly once and no two calls share state, so the
/// result is independent of the worker count.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace dqm
