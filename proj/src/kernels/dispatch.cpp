#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "ccscp/kernels.hpp"

namespace ccscp::kernels {
namespace {

// -1 means automatic selection.
std::atomic<int> g_forced{-1};

Isa detect() noexcept {
  if (const char* env = std::getenv("CCSCP_FORCE_SCALAR"); env && std::strcmp(env, "1") == 0) {
    return Isa::Scalar;
  }
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(CCSCP_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept {
  static const Isa detected = detect();
  const int forced = g_forced.load(std::memory_order_relaxed);
  return forced < 0 ? detected : static_cast<Isa>(forced);
}

void force_isa(std::optional<Isa> isa) noexcept {
  if (!isa) {
    g_forced.store(-1, std::memory_order_relaxed);
  } else if (isa_available(*isa)) {
    g_forced.store(static_cast<int>(*isa), std::memory_order_relaxed);
  }
}

std::size_t count_disc_hits(std::span<const double> z1, std::span<const double> z2,
                            const DiscHitParams& params) {
  if (z1.size() != z2.size()) throw std::invalid_argument("count_disc_hits: size mismatch");
  switch (active_isa()) {
    case Isa::Avx2: return count_disc_hits_avx2(z1, z2, params);
    case Isa::Neon: return count_disc_hits_neon(z1, z2, params);
    case Isa::Scalar: break;
  }
  return count_disc_hits_scalar(z1, z2, params);
}

}  // namespace ccscp::kernels
