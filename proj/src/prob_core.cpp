#include "ccscp/prob_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "ccscp/errors.hpp"

namespace ccscp {
namespace {

constexpr double kTwoOverSqrtPi = 2.0 / 1.7724538509055160273;  // 2/sqrt(pi)
constexpr double kSeriesCutoff = 2.0;

// e^{-x^2} * sum_n (2x^2)^n x / (1*3*...*(2n+1)); every term is positive so the
// sum has no cancellation.
double erf_series(double x) {
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= 2.0 * x2 / (2.0 * n + 1.0);
    sum += term;
    if (term <= sum * 1e-17) break;
  }
  return kTwoOverSqrtPi * std::exp(-x2) * sum;
}

// Laplace continued fraction x + (1/2)/(x + 1/(x + (3/2)/(x + ...))), modified
// Lentz evaluation. Valid for x > 0, converges quickly past the series cutoff.
double erfc_continued_fraction(double x) {
  constexpr double kTiny = 1e-300;
  double f = x;
  double c = f;
  double d = 0.0;
  for (int n = 1; n < 500; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    c = x + a / c;
    if (std::abs(c) < kTiny) c = kTiny;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x * x) / (std::sqrt(std::numbers::pi) * f);
}

}  // namespace

Cov2 Cov2::make(double xx, double xy, double yy) {
  if (!std::isfinite(xx) || !std::isfinite(xy) || !std::isfinite(yy)) {
    throw ValidationError("cov", "entries must be finite");
  }
  if (xx < 0.0 || yy < 0.0) {
    throw ValidationError("cov", "diagonal entries must be nonnegative (PSD)");
  }
  if (xx * yy - xy * xy < -kPsdTolerance) {
    throw ValidationError("cov", "not positive semidefinite: xx*yy - xy^2 = " +
                                     std::to_string(xx * yy - xy * xy));
  }
  return Cov2(xx, xy, yy);
}

PrincipalAxes Cov2::principal_axes() const noexcept {
  const double half_trace = 0.5 * (xx_ + yy_);
  const double half_diff = 0.5 * (xx_ - yy_);
  const double r = std::hypot(half_diff, xy_);
  PrincipalAxes axes;
  axes.major = half_trace + r;
  axes.minor = std::max(0.0, half_trace - r);
  axes.angle = 0.5 * std::atan2(2.0 * xy_, xx_ - yy_);
  return axes;
}

CovFactor cholesky_factor(const Cov2& cov) noexcept {
  CovFactor f;
  if (cov.xx() > 0.0) {
    f.l00 = std::sqrt(cov.xx());
    f.l10 = cov.xy() / f.l00;
    f.l11 = std::sqrt(std::max(0.0, cov.yy() - f.l10 * f.l10));
  } else {
    f.l11 = std::sqrt(cov.yy());
  }
  return f;
}

ChanceLevel ChanceLevel::make(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", delta);
    throw ValidationError("delta", std::string("must lie in the open interval (0, 0.5), got ") + buf);
  }
  return ChanceLevel(delta);
}

GaussianDisc GaussianDisc::make(Vec2 mean, Cov2 cov, double radius) {
  if (!mean.is_finite()) throw ValidationError("mean", "must be finite");
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw ValidationError("radius", "must be finite and >= 0");
  }
  return GaussianDisc{mean, cov, radius};
}

double erf(double x) noexcept {
  if (std::isnan(x)) return x;
  const double ax = std::abs(x);
  const double r = ax <= kSeriesCutoff ? erf_series(ax) : 1.0 - erfc_continued_fraction(ax);
  return std::signbit(x) ? -r : r;
}

double erfc(double x) noexcept {
  if (std::isnan(x)) return x;
  if (x < 0.0) return 2.0 - erfc(-x);
  if (x <= kSeriesCutoff) return 1.0 - erf_series(x);
  return erfc_continued_fraction(x);
}

double erf_inv(double y) {
  if (!(y > -1.0 && y < 1.0)) {
    throw DomainError("erf_inv: argument must lie in (-1, 1)");
  }
  if (y == 0.0) return 0.0;
  const double target = std::abs(y);

  // Newton on erf(x) - target, falling back to bisection whenever the Newton
  // iterate leaves the bracket. erf(6) rounds to 1, so [0, 6] brackets every
  // representable target below 1.
  double lo = 0.0;
  double hi = 6.0;
  double x = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double fx = erf(x) - target;
    if (fx == 0.0) break;
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x - fx / (kTwoOverSqrtPi * std::exp(-x * x));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, x) || hi - lo <= 1e-15 * hi) {
      x = next;
      break;
    }
    x = next;
  }
  return std::signbit(y) ? -x : x;
}

double margin_coefficient(ChanceLevel delta) { return erf_inv(1.0 - 2.0 * delta.value()); }

double directional_stddev(const Cov2& cov, const Vec2& unit_dir) {
  return std::sqrt(std::max(0.0, cov.quad_form(unit_dir)));
}

GaussianDisc propagate_obstacle(const GaussianDisc& disc0, const Vec2& velocity,
                                const Cov2& cov_growth, int k, double dt) {
  if (k < 0) throw ValidationError("k", "step index must be >= 0");
  if (!(dt > 0.0)) throw ValidationError("dt", "must be > 0");
  GaussianDisc out = disc0;
  out.mean = disc0.mean + (static_cast<double>(k) * dt) * velocity;
  out.cov = disc0.cov + static_cast<double>(k) * cov_growth;
  return out;
}

}  // namespace ccscp
