#include "ccscp/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#endif

namespace ccscp::kernels {

#if defined(CCSCP_HAVE_AVX2)

std::size_t count_disc_hits_avx2(std::span<const double> z1, std::span<const double> z2,
                                 const DiscHitParams& p) noexcept {
  const __m256d dx = _mm256_set1_pd(p.offset.x);
  const __m256d dy = _mm256_set1_pd(p.offset.y);
  const __m256d l00 = _mm256_set1_pd(p.factor.l00);
  const __m256d l10 = _mm256_set1_pd(p.factor.l10);
  const __m256d l11 = _mm256_set1_pd(p.factor.l11);
  const __m256d r2 = _mm256_set1_pd(p.radius_sq);

  const std::size_t n = z1.size();
  const std::size_t body = n - n % 4;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d a = _mm256_loadu_pd(z1.data() + i);
    const __m256d b = _mm256_loadu_pd(z2.data() + i);
    const __m256d rx = _mm256_add_pd(dx, _mm256_mul_pd(l00, a));
    const __m256d ry = _mm256_add_pd(_mm256_add_pd(dy, _mm256_mul_pd(l10, a)),
                                     _mm256_mul_pd(l11, b));
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(rx, rx), _mm256_mul_pd(ry, ry));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(d2, r2, _CMP_LE_OQ));
    hits += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(mask)));
  }
  return hits + count_disc_hits_scalar(z1.subspan(body), z2.subspan(body), p);
}

#else

std::size_t count_disc_hits_avx2(std::span<const double> z1, std::span<const double> z2,
                                 const DiscHitParams& p) noexcept {
  return count_disc_hits_scalar(z1, z2, p);
}

#endif

}  // namespace ccscp::kernels
