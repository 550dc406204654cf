#include "ccscp/reform.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "ccscp/errors.hpp"
#include "ccscp/kernels.hpp"
#include "ccscp/rng.hpp"

namespace ccscp {
namespace {

constexpr double kDegenerateDistance = 1e-9;
constexpr std::size_t kShardSize = std::size_t{1} << 13;

std::size_t count_shard(const kernels::DiscHitParams& params, std::uint64_t seed,
                        std::size_t shard, std::size_t count, std::vector<double>& z1,
                        std::vector<double>& z2) {
  const std::uint64_t key = rng::derive_key(seed, shard);
  z1.resize(count);
  z2.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Box-Muller on two counter-indexed uniforms.
    const double u1 = rng::uniform_open_closed(rng::draw(key, 2 * i));
    const double u2 = rng::uniform_closed_open(rng::draw(key, 2 * i + 1));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    z1[i] = r * std::cos(theta);
    z2[i] = r * std::sin(theta);
  }
  return kernels::count_disc_hits(z1, z2, params);
}

}  // namespace

std::string_view policy_name(LinearizationPolicy policy) noexcept {
  return policy == LinearizationPolicy::Fixed ? "fixed" : "iterative";
}

LinearizationPolicy parse_policy(std::string_view name) {
  if (name == "fixed") return LinearizationPolicy::Fixed;
  if (name == "iterative") return LinearizationPolicy::Iterative;
  throw ValidationError("policy", "expected \"fixed\" or \"iterative\", got \"" +
                                      std::string(name) + "\"");
}

LinearizedChanceConstraint linearize_along(const Vec2& unit_normal, const GaussianDisc& obstacle,
                                           double robot_radius, const Cov2& robot_cov,
                                           ChanceLevel delta, int step) {
  const Cov2 total = robot_cov + obstacle.cov;
  const double margin = margin_coefficient(delta) * std::numbers::sqrt2 *
                        directional_stddev(total, unit_normal);
  LinearizedChanceConstraint c;
  c.a = unit_normal;
  c.b = unit_normal.dot(obstacle.mean) + (robot_radius + obstacle.radius) + margin;
  c.step = step;
  return c;
}

LinearizedChanceConstraint linearize_collision(const Vec2& p_lin, const GaussianDisc& obstacle,
                                               double robot_radius, const Cov2& robot_cov,
                                               ChanceLevel delta, int step) {
  const Vec2 d = p_lin - obstacle.mean;
  const double dist = d.norm();
  if (dist < kDegenerateDistance) {
    throw DegenerateLinearization("linearization point coincides with obstacle mean at step " +
                                  std::to_string(step));
  }
  return linearize_along((1.0 / dist) * d, obstacle, robot_radius, robot_cov, delta, step);
}

Vec2 fallback_direction(std::uint64_t seed) noexcept {
  const double u = rng::uniform_closed_open(rng::draw(rng::derive_key(seed, 0xfa11bacc), 0));
  const double angle = (u - 0.5) * (std::numbers::pi / 3.0);
  return {-std::sin(angle), std::cos(angle)};
}

double constraint_residual(const LinearizedChanceConstraint& c, const Vec2& p) noexcept {
  return c.a.dot(p) - c.b;
}

double chance_constraint_value(const Vec2& p, const GaussianDisc& obstacle, double robot_radius,
                               const Cov2& robot_cov, ChanceLevel delta, const Vec2& fallback) {
  try {
    return constraint_residual(
        linearize_collision(p, obstacle, robot_radius, robot_cov, delta, 0), p);
  } catch (const DegenerateLinearization&) {
    return constraint_residual(
        linearize_along(fallback, obstacle, robot_radius, robot_cov, delta, 0), p);
  }
}

double chance_probability_oracle(const Vec2& p, const GaussianDisc& obstacle,
                                 double robot_radius, const Cov2& robot_cov,
                                 std::size_t samples, std::uint64_t seed, unsigned workers) {
  if (samples == 0) throw ValidationError("samples", "must be >= 1");
  const double r_total = robot_radius + obstacle.radius;
  kernels::DiscHitParams params;
  params.offset = obstacle.mean - p;
  params.factor = cholesky_factor(robot_cov + obstacle.cov);
  params.radius_sq = r_total * r_total;

  const std::size_t shards = (samples + kShardSize - 1) / kShardSize;
  auto shard_len = [&](std::size_t s) {
    return std::min(kShardSize, samples - s * kShardSize);
  };
  std::vector<std::size_t> hits(shards, 0);

  const unsigned n_workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(shards)));
  if (n_workers == 1) {
    std::vector<double> z1, z2;
    for (std::size_t s = 0; s < shards; ++s) {
      hits[s] = count_shard(params, seed, s, shard_len(s), z1, z2);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        std::vector<double> z1, z2;
        for (std::size_t s = next.fetch_add(1); s < shards; s = next.fetch_add(1)) {
          hits[s] = count_shard(params, seed, s, shard_len(s), z1, z2);
        }
      });
    }
  }
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  return static_cast<double>(total) / static_cast<double>(samples);
}

}  // namespace ccscp
