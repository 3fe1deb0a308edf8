#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dqm/devices.hpp"
#include "dqm/rng.hpp"

namespace dqm {

/// Exogenous time series for a scenario: one-day slot templates plus per-day
/// modulation factors and the per-load multipliers drawn once per scenario.
struct ProfileSet {
  int slots_per_day = 288;
  std::vector<double> pv;           // PV availability in [0,1], per slot
  std::vector<double> load_shape;   // demand shape, per slot
  std::vector<double> lambda;       // wholesale price, $/MWh, per slot
  std::vector<double> day_load_scale;    // per-day multipliers
  std::vector<double> day_lambda_scale;
  std::vector<double> load_multiplier;   // (1 + delta_j) per load, clipped
  std::uint64_t seed = 0;

  double mean_load_factor() const;  // mean over slots and days of the shape
};

/// Synthetic defaults: PV is a clamped sine over daylight hours, the load a
/// two-peak residential shape, and the wholesale price a load-correlated
/// series. Day factors give week-scale variation.
ProfileSet make_synthetic_profiles(std::uint64_t seed, int slots_per_day,
                                   int days);

/// Draws (1 + delta_j), delta ~ N(0, 0.1), clipped to (0.5, 1.5).
void draw_load_multipliers(ProfileSet* profiles, size_t num_loads, Rng* rng);

/// Replaces one series from a (slot, value) CSV; the file must cover
/// slots_per_day rows.
void override_series(std::vector<double>* series, const std::string& csv_path,
                     int slots_per_day);

PeriodInput build_period_input(const DeviceSet& devices,
                               const ProfileSet& profiles, int day, int slot);

}  // namespace dqm
