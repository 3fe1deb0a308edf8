#pragma once

#include <array>

#include "dqm/common.hpp"
#include "dqm/interval.hpp"

namespace dqm {

/// One bilinear product w = x * y with factor bounds, to be relaxed by its
/// convex hull (the four McCormick envelope rows).
struct McCormickCell {
  int w = -1;  // variable ids
  int x = -1;
  int y = -1;
  double xl = 0, xu = 0;
  double yl = 0, yu = 0;
};

/// One inequality row  cw*w + cx*x + cy*y <= rhs.
struct EnvelopeRow {
  double cw = 0, cx = 0, cy = 0, rhs = 0;

  double violation(double w, double x, double y) const {
    return cw * w + cx * x + cy * y - rhs;
  }
};

/// The four envelope rows:
///   w >= xl*y + x*yl - xl*yl      w >= xu*y + x*yu - xu*yu
///   w <= xu*y + x*yl - xu*yl      w <= xl*y + x*yu - xl*yu
/// Exact at the box corners; for a degenerate factor interval the rows pin
/// w to the exact line (xl == xu gives w = xl*y). Throws on unbounded or
/// inverted factor bounds.
std::array<EnvelopeRow, 4> build_mccormick(const McCormickCell& cell);

}  // namespace dqm
