#include <doctest.h>

#include <cmath>
#include <random>

#include "ccscp/errors.hpp"
#include "ccscp/prob_core.hpp"
#include "oracles.hpp"

using namespace ccscp;

TEST_CASE("erf examples") {
  CHECK(ccscp::erf(0.0) == 0.0);
  CHECK(ccscp::erf(1.0) == doctest::Approx(0.8427007929497149).epsilon(1e-15));
  CHECK(ccscp::erf(-1.0) == -ccscp::erf(1.0));
}

TEST_CASE("erf against long double series and std::erf") {
  for (double x = -3.0; x <= 3.0; x += 0.01) {
    CHECK(std::fabs(ccscp::erf(x) - static_cast<double>(oracle::erf_series(x))) <= 2e-15);
  }
  for (double x = -6.0; x <= 6.0; x += 0.037) {
    CHECK(std::fabs(ccscp::erf(x) - std::erf(x)) <= 2e-15);
    CHECK(std::fabs(ccscp::erfc(x) - std::erfc(x)) <= 1e-14 * std::max(1.0, std::erfc(x)));
  }
}

TEST_CASE("erf_inv examples") {
  CHECK(erf_inv(0.0) == 0.0);
  CHECK(erf_inv(0.9) == doctest::Approx(1.1630871536766743).epsilon(1e-12));
  CHECK(erf_inv(0.99) == doctest::Approx(1.8213863677184496).epsilon(1e-12));
  CHECK(std::fabs(erf_inv(0.9) - oracle::erf_inv_bisect(0.9)) <= 1e-12);
  CHECK(std::fabs(erf_inv(0.99) - oracle::erf_inv_bisect(0.99)) <= 1e-12);
  CHECK_THROWS_AS(erf_inv(1.0), DomainError);
  CHECK_THROWS_AS(erf_inv(-1.5), DomainError);
  CHECK_THROWS_AS(erf_inv(std::nan("")), DomainError);
}

TEST_CASE("erf round trip") {
  for (double y = -0.999; y < 0.999; y += 0.0007) {
    CHECK(std::fabs(ccscp::erf(erf_inv(y)) - y) <= 1e-10);
  }
}

TEST_CASE("margin coefficient") {
  CHECK(margin_coefficient(ChanceLevel::make(0.05)) == doctest::Approx(1.163087).epsilon(1e-6));
  CHECK(margin_coefficient(ChanceLevel::make(0.01)) == doctest::Approx(1.6449763571331868).epsilon(1e-12));
  CHECK(std::fabs(margin_coefficient(ChanceLevel::make(0.5 - 1e-12))) < 1e-11);
  double prev = std::numeric_limits<double>::infinity();
  for (double d = 1e-6; d < 0.5; d *= 1.3) {
    const double c = margin_coefficient(ChanceLevel::make(d));
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("chance level bounds") {
  CHECK_THROWS_AS(ChanceLevel::make(0.0), ValidationError);
  CHECK_THROWS_AS(ChanceLevel::make(0.5), ValidationError);
  try {
    ChanceLevel::make(0.7);
    FAIL("expected throw");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "delta");
    CHECK(std::string(e.what()).find("(0, 0.5)") != std::string::npos);
  }
}

TEST_CASE("directional stddev") {
  const double s2 = 1.0 / std::sqrt(2.0);
  CHECK(directional_stddev(Cov2::isotropic(0.04), {1, 0}) == doctest::Approx(0.2));
  CHECK(directional_stddev(Cov2::make(0.04, 0.0, 0.01), {1, 0}) == doctest::Approx(0.2));
  CHECK(directional_stddev(Cov2::make(0.05, 0.03, 0.05), {s2, s2}) ==
        doctest::Approx(std::sqrt(0.08)).epsilon(1e-14));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double th = 3.2 * U(rng);
    const Vec2 a{std::cos(th), std::sin(th)};
    CHECK(directional_stddev(Cov2::isotropic(0.09), a) == doctest::Approx(0.3).epsilon(1e-14));
    const double xx = std::fabs(U(rng)), yy = std::fabs(U(rng));
    const double xy = U(rng) * std::sqrt(xx * yy);
    const Cov2 c = Cov2::make(xx, xy, yy);
    const double lmax = 0.5 * (xx + yy) + std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    CHECK(directional_stddev(c, a) <= std::sqrt(lmax) * (1 + 1e-12));
    const PrincipalAxes ax = c.principal_axes();
    CHECK(ax.major == doctest::Approx(lmax).epsilon(1e-12));
    CHECK(ax.minor <= ax.major);
  }
}

TEST_CASE("covariance validation") {
  CHECK_THROWS_AS(Cov2::make(0.01, 0.02, 0.01), ValidationError);
  CHECK_THROWS_AS(Cov2::make(-0.01, 0.0, 0.01), ValidationError);
  CHECK_NOTHROW(Cov2::make(0.01, 0.01, 0.01));
}

TEST_CASE("propagate obstacle") {
  const GaussianDisc d0 = GaussianDisc::make({0, 0}, Cov2::isotropic(0.01), 0.4);
  CHECK(propagate_obstacle(d0, {1, 0}, Cov2::isotropic(0.002), 0, 0.1) == d0);
  const GaussianDisc d5 = propagate_obstacle(d0, {1, 0}, Cov2::zero(), 5, 0.1);
  CHECK(d5.mean.x == doctest::Approx(0.5));
  CHECK(d5.mean.y == 0.0);
  CHECK(d5.cov == d0.cov);
  const GaussianDisc d10 = propagate_obstacle(d0, {0, 0}, Cov2::isotropic(0.002), 10, 0.1);
  CHECK(d10.cov.xx() == doctest::Approx(0.03));
  CHECK(d10.cov.yy() == doctest::Approx(0.03));
  double prev = -1.0;
  for (int k = 0; k < 30; ++k) {
    const double tr = propagate_obstacle(d0, {1, 2}, Cov2::make(0.002, 0.001, 0.001), k, 0.1).cov.trace();
    CHECK(tr >= prev);
    prev = tr;
  }
  CHECK_THROWS(propagate_obstacle(d0, {0, 0}, Cov2::zero(), -1, 0.1));
}
