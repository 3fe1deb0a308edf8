#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace dqm {

/// Closed real interval [lo, hi] with outward-safe arithmetic. Used by the
/// bound pre-processing sweep; soundness of the OPF relaxation rests on these
/// operations never shrinking the true range.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double l, double h) : lo(l), hi(h) {}
  static Interval point(double v) { return {v, v}; }

  bool valid() const { return lo <= hi; }
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
  bool contains(double v, double tol = 0.0) const {
    return v >= lo - tol && v <= hi + tol;
  }
  bool is_point(double tol = 1e-12) const { return hi - lo <= tol; }

  Interval operator+(const Interval& o) const { return {lo + o.lo, hi + o.hi}; }
  Interval operator-(const Interval& o) const { return {lo - o.hi, hi - o.lo}; }
  Interval operator-() const { return {-hi, -lo}; }

  Interval operator*(const Interval& o) const {
    const double c[4] = {lo * o.lo, lo * o.hi, hi * o.lo, hi * o.hi};
    return {std::min({c[0], c[1], c[2], c[3]}), std::max({c[0], c[1], c[2], c[3]})};
  }
  Interval operator*(double s) const {
    return s >= 0 ? Interval{lo * s, hi * s} : Interval{hi * s, lo * s};
  }

  /// Division by an interval known to be strictly positive.
  Interval div_pos(const Interval& o) const {
    const double c[4] = {lo / o.lo, lo / o.hi, hi / o.lo, hi / o.hi};
    return {std::min({c[0], c[1], c[2], c[3]}), std::max({c[0], c[1], c[2], c[3]})};
  }

  /// Intersection; empty result means the enclosed set is infeasible.
  std::optional<Interval> meet(const Interval& o) const {
    const double l = std::max(lo, o.lo), h = std::min(hi, o.hi);
    if (l > h) return std::nullopt;
    return Interval{l, h};
  }

  /// Intersects with [-m, m].
  Interval clamp_abs(double m) const {
    return {std::max(lo, -m), std::min(hi, m)};
  }

  std::string str() const;
};

inline Interval operator*(double s, const Interval& i) { return i * s; }

/// Range of r*cos(theta) over r in [rmin, rmax], theta in [t0, t1]
/// (0 < rmin <= rmax, interval in radians).
Interval sector_cos_range(double rmin, double rmax, double t0, double t1);
/// Same for r*sin(theta).
Interval sector_sin_range(double rmin, double rmax, double t0, double t1);

}  // namespace dqm
