#include "ccscp/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace ccscp::kernels {

#if defined(__aarch64__)

std::size_t count_disc_hits_neon(std::span<const double> z1, std::span<const double> z2,
                                 const DiscHitParams& p) noexcept {
  const float64x2_t dx = vdupq_n_f64(p.offset.x);
  const float64x2_t dy = vdupq_n_f64(p.offset.y);
  const float64x2_t l00 = vdupq_n_f64(p.factor.l00);
  const float64x2_t l10 = vdupq_n_f64(p.factor.l10);
  const float64x2_t l11 = vdupq_n_f64(p.factor.l11);
  const float64x2_t r2 = vdupq_n_f64(p.radius_sq);

  const std::size_t n = z1.size();
  const std::size_t body = n - n % 2;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < body; i += 2) {
    const float64x2_t a = vld1q_f64(z1.data() + i);
    const float64x2_t b = vld1q_f64(z2.data() + i);
    // vmulq + vaddq, never vfmaq: the scalar reference rounds after each op.
    const float64x2_t rx = vaddq_f64(dx, vmulq_f64(l00, a));
    const float64x2_t ry = vaddq_f64(vaddq_f64(dy, vmulq_f64(l10, a)), vmulq_f64(l11, b));
    const float64x2_t d2 = vaddq_f64(vmulq_f64(rx, rx), vmulq_f64(ry, ry));
    const uint64x2_t le = vcleq_f64(d2, r2);
    hits += (vgetq_lane_u64(le, 0) & 1U) + (vgetq_lane_u64(le, 1) & 1U);
  }
  return hits + count_disc_hits_scalar(z1.subspan(body), z2.subspan(body), p);
}

#else

std::size_t count_disc_hits_neon(std::span<const double> z1, std::span<const double> z2,
                                 const DiscHitParams& p) noexcept {
  return count_disc_hits_scalar(z1, z2, p);
}

#endif

}  // namespace ccscp::kernels
