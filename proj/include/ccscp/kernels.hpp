#pragma once

// Data-parallel Monte-Carlo kernels. Each kernel has a scalar reference and
// vectorized variants that must agree with it bit for bit; the variant is
// chosen once at runtime from the host CPU.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "ccscp/prob_core.hpp"

namespace ccscp::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

/// Whether this build contains `isa` and the host CPU can run it.
bool isa_available(Isa isa) noexcept;

/// Variant used by the dispatching entry points. Defaults to the widest
/// available ISA; CCSCP_FORCE_SCALAR=1 in the environment selects Scalar.
Isa active_isa() noexcept;

/// Overrides the dispatch choice (tests and benchmarks). std::nullopt restores
/// automatic selection. Ignored for ISAs that are not available.
void force_isa(std::optional<Isa> isa) noexcept;

/// Sample i is offset + L z_i with z_i = (z1[i], z2[i]); it is a hit when its
/// squared norm is <= radius_sq.
struct DiscHitParams {
  Vec2 offset;
  CovFactor factor;
  double radius_sq = 0.0;
};

/// Number of hits; dispatches to active_isa(). z1 and z2 must have equal size.
std::size_t count_disc_hits(std::span<const double> z1, std::span<const double> z2,
                            const DiscHitParams& params);

/// Explicit variants. Calling one whose ISA is unavailable is undefined.
std::size_t count_disc_hits_scalar(std::span<const double> z1, std::span<const double> z2,
                                   const DiscHitParams& params) noexcept;
std::size_t count_disc_hits_avx2(std::span<const double> z1, std::span<const double> z2,
                                 const DiscHitParams& params) noexcept;
std::size_t count_disc_hits_neon(std::span<const double> z1, std::span<const double> z2,
                                 const DiscHitParams& params) noexcept;

}  // namespace ccscp::kernels
