#pragma once

// Gaussian primitives used by the chance-constraint reformulation: the error
// function and its inverse, 2x2 covariances, and the obstacle prediction model.

#include <cmath>

namespace ccscp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  bool is_finite() const noexcept { return std::isfinite(x) && std::isfinite(y); }
  double dot(const Vec2& o) const noexcept { return x * o.x + y * o.y; }
  double norm() const noexcept { return std::hypot(x, y); }

  friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Principal axes of a 2x2 covariance: eigenvalues major >= minor >= 0 and the
/// angle (radians) of the major axis measured from +x.
struct PrincipalAxes {
  double major = 0.0;
  double minor = 0.0;
  double angle = 0.0;
};

/// Symmetric positive semidefinite 2x2 covariance stored as three scalars.
class Cov2 {
 public:
  static constexpr double kPsdTolerance = 1e-12;

  Cov2() = default;

  /// Throws ValidationError if the matrix is not PSD (xx, yy >= 0 and
  /// xx*yy - xy^2 >= -kPsdTolerance) or has non-finite entries.
  static Cov2 make(double xx, double xy, double yy);
  static Cov2 isotropic(double variance) { return make(variance, 0.0, variance); }
  static Cov2 zero() noexcept { return Cov2{}; }

  double xx() const noexcept { return xx_; }
  double xy() const noexcept { return xy_; }
  double yy() const noexcept { return yy_; }
  double determinant() const noexcept { return xx_ * yy_ - xy_ * xy_; }
  double trace() const noexcept { return xx_ + yy_; }
  bool is_zero() const noexcept { return xx_ == 0.0 && xy_ == 0.0 && yy_ == 0.0; }

  /// v^T Sigma v
  double quad_form(const Vec2& v) const noexcept {
    return xx_ * v.x * v.x + 2.0 * xy_ * v.x * v.y + yy_ * v.y * v.y;
  }

  PrincipalAxes principal_axes() const noexcept;

  friend Cov2 operator+(const Cov2& a, const Cov2& b) noexcept {
    return Cov2(a.xx_ + b.xx_, a.xy_ + b.xy_, a.yy_ + b.yy_);
  }
  friend Cov2 operator*(double s, const Cov2& a) noexcept {
    return Cov2(s * a.xx_, s * a.xy_, s * a.yy_);
  }
  friend bool operator==(const Cov2&, const Cov2&) = default;

 private:
  Cov2(double xx, double xy, double yy) noexcept : xx_(xx), xy_(xy), yy_(yy) {}

  double xx_ = 0.0;
  double xy_ = 0.0;
  double yy_ = 0.0;
};

/// Lower-triangular factor L with L L^T = Sigma (semidefinite inputs allowed).
struct CovFactor {
  double l00 = 0.0;
  double l10 = 0.0;
  double l11 = 0.0;
};
CovFactor cholesky_factor(const Cov2& cov) noexcept;

/// Allowed per-step collision probability, 0 < delta < 0.5.
class ChanceLevel {
 public:
  static ChanceLevel make(double delta);
  double value() const noexcept { return delta_; }
  friend bool operator==(const ChanceLevel&, const ChanceLevel&) = default;

 private:
  explicit ChanceLevel(double delta) noexcept : delta_(delta) {}
  double delta_;
};

/// Obstacle at one time step: Gaussian position plus a disc radius.
struct GaussianDisc {
  Vec2 mean;
  Cov2 cov;
  double radius = 0.0;

  /// Throws ValidationError on a negative radius or non-finite mean.
  static GaussianDisc make(Vec2 mean, Cov2 cov, double radius);
  friend bool operator==(const GaussianDisc&, const GaussianDisc&) = default;
};

/// Error function, accurate to about 1e-15 absolute.
double erf(double x) noexcept;
/// Complementary error function.
double erfc(double x) noexcept;
/// Inverse error function on (-1, 1); throws DomainError otherwise.
double erf_inv(double y);

/// c(delta) = erf_inv(1 - 2 delta). Multiplied by sqrt(2) it is the one-sided
/// standard normal quantile at 1 - delta.
double margin_coefficient(ChanceLevel delta);

/// sqrt(a^T Sigma a) for a unit direction a.
double directional_stddev(const Cov2& cov, const Vec2& unit_dir);

/// Constant-velocity prediction with additive covariance growth:
/// mean = mean0 + k dt v, cov = cov0 + k growth.
GaussianDisc propagate_obstacle(const GaussianDisc& disc0, const Vec2& velocity,
                                const Cov2& cov_growth, int k, double dt);

}  // namespace ccscp
