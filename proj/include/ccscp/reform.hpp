#pragma once

// Deterministic surrogate of the per-step collision chance constraint.
//
// For a robot at p and an obstacle N(mean, Sigma_obs) with combined covariance
// Sigma = Sigma_robot + Sigma_obs, linearizing at p_lin gives the half-plane
//
//   a^T p >= b,  a = (p_lin - mean) / |p_lin - mean|,
//   b = a^T mean + r_robot + r_obs + c(delta) * sqrt(2) * sqrt(a^T Sigma a).
//
// Along a the collision event is contained in a one-dimensional Gaussian tail
// of mass delta, so the half-plane is a conservative stand-in for
// P(collision) <= delta.

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "ccscp/prob_core.hpp"

namespace ccscp {

/// When the collision constraints are linearized: once at the initial guess
/// (Fixed), or at every accepted solver iterate (Iterative).
enum class LinearizationPolicy { Fixed, Iterative };

std::string_view policy_name(LinearizationPolicy policy) noexcept;
/// Parses "fixed" / "iterative"; throws ValidationError otherwise.
LinearizationPolicy parse_policy(std::string_view name);

/// Half-plane a^T p - b >= 0 for horizon step `step`.
struct LinearizedChanceConstraint {
  Vec2 a;
  double b = 0.0;
  int step = 0;

  friend bool operator==(const LinearizedChanceConstraint&,
                         const LinearizedChanceConstraint&) = default;
};

/// Throws DegenerateLinearization if |p_lin - mean| < 1e-9.
LinearizedChanceConstraint linearize_collision(const Vec2& p_lin, const GaussianDisc& obstacle,
                                               double robot_radius, const Cov2& robot_cov,
                                               ChanceLevel delta, int step);

/// Same surrogate for a caller-supplied unit normal (used for the degenerate
/// fallback).
LinearizedChanceConstraint linearize_along(const Vec2& unit_normal, const GaussianDisc& obstacle,
                                           double robot_radius, const Cov2& robot_cov,
                                           ChanceLevel delta, int step);

/// Fallback normal for a degenerate linearization: (0, 1) rotated by a
/// seed-derived angle in [-pi/6, pi/6].
Vec2 fallback_direction(std::uint64_t seed) noexcept;

/// a^T p - b; nonnegative means satisfied.
double constraint_residual(const LinearizedChanceConstraint& c, const Vec2& p) noexcept;

/// Nonlinear deterministic constraint value: the residual of the surrogate
/// linearized at p itself, |p - mean| - r_total - c(delta) sqrt(2) sigma_a.
/// Uses `fallback` as the direction when p coincides with the mean.
double chance_constraint_value(const Vec2& p, const GaussianDisc& obstacle, double robot_radius,
                               const Cov2& robot_cov, ChanceLevel delta, const Vec2& fallback);

/// Monte-Carlo estimate of P(|obstacle - robot| <= r_robot + r_obs) with the
/// relative position drawn from N(mean - p, Sigma_robot + Sigma_obs). Samples
/// are drawn in fixed-size shards keyed by (seed, shard index); `workers`
/// threads only change wall time, never the result.
double chance_probability_oracle(const Vec2& p, const GaussianDisc& obstacle,
                                 double robot_radius, const Cov2& robot_cov,
                                 std::size_t samples, std::uint64_t seed,
                                 unsigned workers = 1);

}  // namespace ccscp
