#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dqm/mccormick.hpp"
#include "dqm/rng.hpp"

using namespace dqm;

namespace {
/// Feasible w interval implied by the four rows at a given (x, y).
std::pair<double, double> w_range(const std::array<EnvelopeRow, 4>& rows,
                                  double x, double y) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const EnvelopeRow& r : rows) {
    // cw*w + cx*x + cy*y <= rhs
    const double bound = (r.rhs - r.cx * x - r.cy * y) / r.cw;
    if (r.cw > 0)
      hi = std::min(hi, bound);
    else
      lo = std::max(lo, bound);
  }
  return {lo, hi};
}
}  // namespace

TEST_CASE("corner exactness: x,y in [0,1], at (1,1) the envelopes force w=1") {
  const auto rows = build_mccormick({0, 1, 2, 0, 1, 0, 1});
  const auto [lo, hi] = w_range(rows, 1.0, 1.0);
  CHECK(lo == doctest::Approx(1.0));
  CHECK(hi == doctest::Approx(1.0));
}

TEST_CASE("x in [0,2], y in [-1,1], at (1,0) the implied w range is [-1,1]") {
  const auto rows = build_mccormick({0, 1, 2, 0, 2, -1, 1});
  const auto [lo, hi] = w_range(rows, 1.0, 0.0);
  CHECK(lo == doctest::Approx(-1.0));
  CHECK(hi == doctest::Approx(1.0));
}

TEST_CASE("degenerate interval reduces to the exact line w = xL*y") {
  const double c = 0.7;
  const auto rows = build_mccormick({0, 1, 2, c, c, -2, 3});
  for (double y : {-2.0, -0.5, 0.0, 1.3, 3.0}) {
    const auto [lo, hi] = w_range(rows, c, y);
    CHECK(lo == doctest::Approx(c * y));
    CHECK(hi == doctest::Approx(c * y));
  }
}

TEST_CASE("envelope soundness under random sampling") {
  Rng rng(20240817);
  for (int trial = 0; trial < 20000; ++trial) {
    const double xl = rng.uniform(-3, 3);
    const double xu = xl + rng.uniform(0, 4);
    const double yl = rng.uniform(-3, 3);
    const double yu = yl + rng.uniform(0, 4);
    const auto rows = build_mccormick({0, 1, 2, xl, xu, yl, yu});
    const double x = rng.uniform(xl, xu);
    const double y = rng.uniform(yl, yu);
    const double w = x * y;  // the true product satisfies all four rows
    for (const EnvelopeRow& r : rows)
      CHECK(r.violation(w, x, y) <= 1e-9);
  }
}

TEST_CASE("invalid cells are rejected") {
  CHECK_THROWS_AS(
      build_mccormick({0, 1, 2, 0, std::numeric_limits<double>::infinity(), 0, 1}),
      ValidationError);
  CHECK_THROWS_AS(build_mccormick({0, 1, 2, 1, 0, 0, 1}), ValidationError);
}
