#include "dqm/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dqm/csv.hpp"

namespace dqm {

double ProfileSet::mean_load_factor() const {
  double s = 0;
  for (double v : load_shape) s += v;
  s /= static_cast<double>(load_shape.size());
  double ds = 0;
  for (double v : day_load_scale) ds += v;
  ds /= static_cast<double>(day_load_scale.size());
  return s * ds;
}

ProfileSet make_synthetic_profiles(std::uint64_t seed, int slots_per_day,
                                   int days) {
  ProfileSet ps;
  ps.seed = seed;
  ps.slots_per_day = slots_per_day;
  ps.pv.resize(slots_per_day);
  ps.load_shape.resize(slots_per_day);
  ps.lambda.resize(slots_per_day);
  for (int t = 0; t < slots_per_day; ++t) {
    const double h = 24.0 * t / slots_per_day;
    // Daylight window 6h-20h.
    double pv = 0.0;
    if (h > 6.0 && h < 20.0)
      pv = std::pow(std::sin(std::numbers::pi * (h - 6.0) / 14.0), 1.2);
    ps.pv[t] = std::clamp(pv, 0.0, 1.0);
    // Two-peak residential shape, morning and evening.
    const double morning = std::exp(-std::pow((h - 8.5) / 2.5, 2));
    const double evening = std::exp(-std::pow((h - 19.0) / 3.0, 2));
    ps.load_shape[t] = 0.55 + 0.18 * morning + 0.32 * evening;
  }
  const double lmax =
      *std::max_element(ps.load_shape.begin(), ps.load_shape.end());
  for (double& v : ps.load_shape) v /= lmax;
  for (int t = 0; t < slots_per_day; ++t) {
    const double norm = (ps.load_shape[t] - 0.5) / 0.5;  // roughly [0, 1]
    ps.lambda[t] = 20.0 + 60.0 * std::pow(std::clamp(norm, 0.0, 1.0), 1.5);
  }
  Rng rng(seed ^ 0x5eedf00dULL);
  ps.day_load_scale.resize(std::max(1, days));
  ps.day_lambda_scale.resize(std::max(1, days));
  for (int d = 0; d < std::max(1, days); ++d) {
    const double phase = 2.0 * std::numbers::pi * d / 7.0;
    ps.day_load_scale[d] =
        1.0 + 0.08 * std::sin(phase + 0.7) + 0.03 * rng.normal();
    ps.day_lambda_scale[d] =
        1.0 + 0.15 * std::sin(phase + 0.3) + 0.05 * rng.normal();
    ps.day_load_scale[d] = std::clamp(ps.day_load_scale[d], 0.75, 1.25);
    ps.day_lambda_scale[d] = std::clamp(ps.day_lambda_scale[d], 0.6, 1.6);
  }
  return ps;
}

void draw_load_multipliers(ProfileSet* profiles, size_t num_loads, Rng* rng) {
  profiles->load_multiplier.resize(num_loads);
  for (size_t i = 0; i < num_loads; ++i) {
    double m = 1.0 + rng->normal(0.0, 0.1);
    // Clip to (0.5, 1.5).
    profiles->load_multiplier[i] = std::clamp(m, 0.5 + 1e-9, 1.5 - 1e-9);
  }
}

void override_series(std::vector<double>* series, const std::string& csv_path,
                     int slots_per_day) {
  const auto rows = csv::read_file(csv_path);
  std::vector<double> vals(slots_per_day, 0.0);
  std::vector<bool> seen(slots_per_day, false);
  for (const auto& f : rows) {
    if (f.size() != 2) throw ValidationError(csv_path + ": profile rows are slot,value");
    if (f[0] == "slot") continue;  // header
    const int slot = csv::to_int(f[0], csv_path);
    if (slot < 0 || slot >= slots_per_day)
      throw ValidationError(csv_path + ": slot " + f[0] + " out of range");
    vals[slot] = csv::to_double(f[1], csv_path);
    seen[slot] = true;
  }
  for (int t = 0; t < slots_per_day; ++t)
    if (!seen[t])
      throw ValidationError(csv_path + ": missing slot " + std::to_string(t));
  *series = std::move(vals);
}

PeriodInput build_period_input(const DeviceSet& devices,
                               const ProfileSet& profiles, int day, int slot) {
  PeriodInput in;
  in.day = day;
  in.slot = slot;
  in.duration_hours = 24.0 / profiles.slots_per_day;
  const double dl = profiles.day_load_scale[day % profiles.day_load_scale.size()];
  const double dm = profiles.day_lambda_scale[day % profiles.day_lambda_scale.size()];
  in.lambda_p = profiles.lambda[slot] * dm;
  in.gen_avail.assign(devices.generators.size(), profiles.pv[slot]);
  in.load_scale.resize(devices.loads.size());
  for (size_t l = 0; l < devices.loads.size(); ++l) {
    const double mult = l < profiles.load_multiplier.size()
                            ? profiles.load_multiplier[l]
                            : 1.0;
    in.load_scale[l] = profiles.load_shape[slot] * dl * mult;
  }
  return in;
}

}  // namespace dqm
