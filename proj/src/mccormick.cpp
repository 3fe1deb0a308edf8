#include "dqm/mccormick.hpp"

#include <cmath>

namespace dqm {

std::array<EnvelopeRow, 4> build_mccormick(const McCormickCell& c) {
  if (!std::isfinite(c.xl) || !std::isfinite(c.xu) || !std::isfinite(c.yl) ||
      !std::isfinite(c.yu))
    throw ValidationError("McCormick cell: unbounded factor");
  if (c.xl > c.xu || c.yl > c.yu)
    throw ValidationError("McCormick cell: factor bounds out of order");
  return {
      EnvelopeRow{-1.0, c.yl, c.xl, c.xl * c.yl},  // w >= xl*y + x*yl - xl*yl
      EnvelopeRow{-1.0, c.yu, c.xu, c.xu * c.yu},  // w >= xu*y + x*yu - xu*yu
      EnvelopeRow{+1.0, -c.yl, -c.xu, -c.xu * c.yl},  // w <= xu*y + x*yl - xu*yl
      EnvelopeRow{+1.0, -c.yu, -c.xl, -c.xl * c.yu},  // w <= xl*y + x*yu - xl*yu
  };
}

}  // namespace dqm
