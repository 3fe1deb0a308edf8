#include "dqm/metrics.hpp"

#include <cmath>

namespace dqm {

double dg_penetration(const DeviceSet& devices, double avg_load) {
  if (avg_load <= 0) throw ValidationError("dg_penetration: zero average load");
  return devices.total_nameplate() / avg_load;
}

double average_load(const DeviceSet& devices, const std::vector<double>& mult,
                    double mean_shape_factor) {
  double s = 0;
  for (size_t l = 0; l < devices.loads.size(); ++l)
    s += devices.loads[l].p * (l < mult.size() ? mult[l] : 1.0);
  return s * mean_shape_factor;
}

namespace {
struct EnergySums {
  double gen_p = 0, gen_q = 0, gen_s = 0;
  double load_p = 0, load_q = 0, load_s = 0;
};
EnergySums sums(const std::vector<ClearingResult>& results) {
  EnergySums e;
  for (const ClearingResult& r : results) {
    const double dt = r.duration_hours;
    for (const auto& g : r.gen)
      for (int p = 0; p < 3; ++p) {
        e.gen_p += g[p][0] * dt;
        e.gen_q += g[p][1] * dt;
        e.gen_s += std::hypot(g[p][0], g[p][1]) * dt;
      }
    for (const auto& l : r.load) {
      e.load_p += l[0] * dt;
      e.load_q += l[1] * dt;
      e.load_s += std::hypot(l[0], l[1]) * dt;
    }
  }
  return e;
}
}  // namespace

double dg_energy_penetration(const std::vector<ClearingResult>& results) {
  const EnergySums e = sums(results);
  return e.load_s > 0 ? e.gen_s / e.load_s : 0.0;
}

double dg_q_utilization(const std::vector<ClearingResult>& results) {
  const EnergySums e = sums(results);
  return e.load_q > 0 ? e.gen_q / e.load_q : 0.0;
}

double dg_p_utilization(const std::vector<ClearingResult>& results) {
  const EnergySums e = sums(results);
  return e.load_p > 0 ? e.gen_p / e.load_p : 0.0;
}

std::vector<double> dg_p_utilization_by_slot(const std::vector<ClearingResult>& results) {
  std::vector<double> out;
  out.reserve(results.size());
  for (const ClearingResult& r : results) {
    double gp = 0, lp = 0;
    for (const auto& g : r.gen)
      for (int p = 0; p < 3; ++p) gp += g[p][0];
    for (const auto& l : r.load) lp += l[0];
    out.push_back(lp > 0 ? gp / lp : 0.0);
  }
  return out;
}

double network_losses(const std::vector<ClearingResult>& results) {
  if (results.empty()) return 0.0;
  double s = 0;
  for (const ClearingResult& r : results) s += r.loss_p;
  return s / static_cast<double>(results.size());
}

double mean_voltage(const std::vector<ClearingResult>& results,
                    const std::vector<int>& buses) {
  double s = 0;
  long count = 0;
  for (const ClearingResult& r : results)
    for (int j : buses)
      for (int p = 0; p < 3; ++p) {
        const auto& np = r.node[j][p];
        if (!np.present) continue;
        s += std::hypot(np.vr, np.vi);
        ++count;
      }
  return count ? s / count : 0.0;
}

double coeff_variation(const std::vector<double>& series) {
  if (series.empty()) return 0.0;
  double mean = 0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  if (mean == 0.0) return 0.0;
  double var = 0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= static_cast<double>(series.size());  // population variance
  return std::sqrt(var) / std::abs(mean);
}

double power_factor(double p_sum, double q_sum) {
  if (p_sum == 0.0 && q_sum == 0.0) return 1.0;
  return std::cos(std::atan2(q_sum, p_sum));
}

}  // namespace dqm
