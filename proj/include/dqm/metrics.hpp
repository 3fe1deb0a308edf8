#pragma once

#include <vector>

#include "dqm/market.hpp"

namespace dqm {

/// Nameplate capacity over average served load; both p.u.
double dg_penetration(const DeviceSet& devices, double average_load);

/// Average load implied by the loads, their multipliers, and the shapes.
double average_load(const DeviceSet& devices, const std::vector<double>& scale_by_load,
                    double mean_shape_factor);

/// Apparent-energy ratio of DG production to load consumption over a horizon
/// (device-level dispatch).
double dg_energy_penetration(const std::vector<ClearingResult>& results);

/// Fraction of reactive load energy served by DGs over the horizon.
double dg_q_utilization(const std::vector<ClearingResult>& results);
/// Same for real power.
double dg_p_utilization(const std::vector<ClearingResult>& results);

/// Per-slot DG-P utilization; the midday peak of this is the saturation
/// diagnostic.
std::vector<double> dg_p_utilization_by_slot(const std::vector<ClearingResult>& results);

/// Mean of the per-period real losses, p.u.
double network_losses(const std::vector<ClearingResult>& results);

/// Voltage magnitude averaged over the given buses (and their present
/// phases) and all periods.
double mean_voltage(const std::vector<ClearingResult>& results,
                    const std::vector<int>& buses);

/// Population coefficient of variation, std/mean. Zero for constant series;
/// 0 when the mean is 0.
double coeff_variation(const std::vector<double>& series);

/// cos(arctan(sum_q / sum_p)) over the phase sums of one DG's dispatch.
double power_factor(double p_sum, double q_sum);

}  // namespace dqm
