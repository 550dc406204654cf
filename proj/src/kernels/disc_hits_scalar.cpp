#include "ccscp/kernels.hpp"

namespace ccscp::kernels {

// Reference arithmetic. The vector variants reproduce this exact operation
// order without fused multiply-add, so results match bit for bit.
std::size_t count_disc_hits_scalar(std::span<const double> z1, std::span<const double> z2,
                                   const DiscHitParams& p) noexcept {
  const double dx = p.offset.x;
  const double dy = p.offset.y;
  const double l00 = p.factor.l00;
  const double l10 = p.factor.l10;
  const double l11 = p.factor.l11;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < z1.size(); ++i) {
    const double rx = dx + l00 * z1[i];
    const double ry = (dy + l10 * z1[i]) + l11 * z2[i];
    const double d2 = rx * rx + ry * ry;
    hits += d2 <= p.radius_sq ? 1 : 0;
  }
  return hits;
}

}  // namespace ccscp::kernels
