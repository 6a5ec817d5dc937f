#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lyapmc/quadrature.hpp"
#include "lyapmc/reference.hpp"

using namespace lyapmc;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Bessel series oracles, accurate for arguments up to a few. Kept local so
// the library values are checked against an independent route.
double i0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1, sum = 1;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double k0_series(double x) {
  const double gamma = 0.57721566490153286061;
  const double q = 0.25 * x * x;
  double term = 1, harmonic = 0, sum = 0;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    sum += term * harmonic;
    if (term < 1e-18) break;
  }
  return -(std::log(0.5 * x) + gamma) * i0_series(x) + sum;
}

double j0_series(double x) {
  const double q = -0.25 * x * x;
  double term = 1, sum = 1;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-18) break;
  }
  return sum;
}
}  // namespace

TEST_CASE("panel integration on known integrals") {
  CHECK(integrate([](double x) { return x * x; }, 0, 1) == Catch::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::sin(x); }, 0, kPi) == Catch::Approx(2.0).epsilon(1e-10));
  // inverse square root: integrable endpoint singularity, nodes are interior
  CHECK(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0, 1, 1e-9) ==
        Catch::Approx(2.0).epsilon(1e-7));
  // divergent integrand: the panel budget binds before the error settles
  // (with a huge budget the singular panel would shrink to zero width first)
  CHECK_THROWS(integrate([](double x) { return 1.0 / x; }, 0, 1, 1e-10, 0.0, 200));
}

TEST_CASE("half line integration") {
  CHECK(integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0) ==
        Catch::Approx(1.0).epsilon(1e-9));
  CHECK(integrate_to_infinity([](double x) { return std::exp(-x * x); }, 0.0) ==
        Catch::Approx(0.5 * std::sqrt(kPi)).epsilon(1e-9));
}

TEST_CASE("ball eigenvalues") {
  CHECK(dirichlet_eigenvalue(1) == Catch::Approx(kPi * kPi / 8).epsilon(1e-15));
  CHECK(dirichlet_eigenvalue(3) == Catch::Approx(kPi * kPi / 2).epsilon(1e-15));
  // d=2: locate the first zero of J0 by bisection on the series
  double lo = 2.0, hi = 3.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (j0_series(lo) * j0_series(mid) <= 0 ? hi : lo) = mid;
  }
  const double j01 = 0.5 * (lo + hi);
  CHECK(dirichlet_eigenvalue(2) == Catch::Approx(0.5 * j01 * j01).epsilon(1e-12));
  CHECK(dirichlet_eigenvalue(2) == Catch::Approx(2.891592981473392).epsilon(1e-15));
  CHECK_THROWS_AS(dirichlet_eigenvalue(4), std::invalid_argument);
}

TEST_CASE("constant potential rate") {
  CHECK(alpha_const(0.5, 3.0) == Catch::Approx(3.0).epsilon(1e-15));
  CHECK(alpha_const(2.0, 1.0) == Catch::Approx(2.0).epsilon(1e-15));
  CHECK(alpha_const<2>(0.5, Vec<2>{3.0, 4.0}) == Catch::Approx(5.0).epsilon(1e-15));
  CHECK(hitting_laplace_1d(0.5, 2.0) == Catch::Approx(std::exp(-2.0)).epsilon(1e-15));
}

TEST_CASE("kernel closed form in one dimension") {
  for (double eta : {0.3, 0.5, 2.0})
    for (double l : {0.2, 1.0, 7.0}) {
      const double k = std::sqrt(2 * eta);
      CHECK(green_const(1, eta, l) == Catch::Approx(std::exp(-k * l) / k).epsilon(1e-12));
    }
}

TEST_CASE("kernel closed form in three dimensions") {
  for (double eta : {0.5, 1.5})
    for (double l : {0.5, 1.0, 5.0}) {
      const double k = std::sqrt(2 * eta);
      CHECK(green_const(3, eta, l) ==
            Catch::Approx(std::exp(-k * l) / (2 * kPi * l)).epsilon(1e-9));
    }
  // the two-point form only sees the separation
  CHECK(green_const<3>(0.5, Vec<3>{1.0, 2.0, 2.0}, Vec<3>{1.0, -1.0, -2.0}) ==
        Catch::Approx(green_const(3, 0.5, 5.0)).epsilon(1e-14));
}

TEST_CASE("two dimensional kernel matches the Bessel route") {
  // g_2(l) = K0(k l) / pi for the kernel of eta - Laplacian/2
  for (double eta : {0.5, 1.0})
    for (double l : {0.5, 1.0, 2.0}) {
      const double k = std::sqrt(2 * eta);
      CHECK(green_const(2, eta, l) == Catch::Approx(k0_series(k * l) / kPi).epsilon(1e-9));
    }
  // frozen spot value
  CHECK(green_const(2, 0.5, 1.0) == Catch::Approx(0.42102443824070823 / kPi).epsilon(1e-10));
}

TEST_CASE("kernel decreases in separation and in the potential level") {
  for (int d : {1, 2, 3}) {
    double prev = 1e300;
    for (double l : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      const double g = green_const(d, 0.5, l);
      REQUIRE(g < prev);
      prev = g;
    }
    prev = 1e300;
    for (double eta : {0.25, 0.5, 1.0, 2.0}) {
      const double g = green_const(d, eta, 2.0);
      REQUIRE(g < prev);
      prev = g;
    }
  }
}

TEST_CASE("log kernel per unit distance approaches the decay rate") {
  // -ln g / l -> k with a (d-1)/2 * ln(l)/l + ln(c)/l correction
  for (int d : {1, 2, 3}) {
    const double eta = 2.0;
    const double k = std::sqrt(2 * eta);
    const double dev20 = std::abs(-green_log(d, eta, 20.0) / 20.0 - k);
    const double dev40 = std::abs(-green_log(d, eta, 40.0) / 40.0 - k);
    CHECK(dev40 < dev20);
    CHECK(dev40 <= (0.5 * (d - 1) + 1.0) * std::log(40.0) / 40.0);
  }
}

TEST_CASE("asymptotic ratio limits") {
  const double eta = 0.5;
  const double k = std::sqrt(2 * eta);
  // d=1: the ratio is k for every l, no asymptotics involved
  for (double l : {1.0, 5.0, 30.0})
    CHECK(green_asymptotic_ratio(1, eta, l) == Catch::Approx(k).epsilon(1e-12));
  // d=3: kernel is exactly exp(-kl)/(2 pi l), so the ratio is 2 pi for all l
  for (double l : {1.0, 5.0, 30.0})
    CHECK(green_asymptotic_ratio(3, eta, l) == Catch::Approx(2 * kPi).epsilon(1e-8));
  // d=2: drifts toward sqrt(2 pi k) like 1/l
  const double limit = std::sqrt(2 * kPi * k);
  const double r20 = green_asymptotic_ratio(2, eta, 20.0);
  const double r40 = green_asymptotic_ratio(2, eta, 40.0);
  CHECK(std::abs(r40 - limit) < std::abs(r20 - limit));
  CHECK(std::abs(r40 / limit - 1.0) < 0.01);
}

TEST_CASE("kernel tail weight in the separation variable") {
  // D_l = integral_0^inf exp(-k v) (v (v/l + 2))^{(d-3)/2} dv. For d=3 the
  // weight is 1, so D_l = 1/k for every l. For d=2 the integrand grows with
  // l pointwise, so D_l is nondecreasing. Substituting v = w^2 removes the
  // 1/sqrt(v) endpoint singularity in d=2.
  const double eta = 0.5;
  const double k = std::sqrt(2 * eta);
  auto d2_of_l = [&](double l) {
    return integrate_to_infinity(
        [&](double w) { return 2.0 * std::exp(-k * w * w) / std::sqrt(w * w / l + 2.0); }, 0.0,
        1e-9);
  };
  double prev = 0;
  for (double l : {1.0, 2.0, 5.0, 10.0, 40.0}) {
    const double dl = d2_of_l(l);
    REQUIRE(dl >= prev);
    prev = dl;
  }
  auto d3_of_l = [&](double l) {
    (void)l;
    return integrate_to_infinity([&](double v) { return std::exp(-k * v); }, 0.0, 1e-9);
  };
  for (double l : {1.0, 10.0}) CHECK(d3_of_l(l) == Catch::Approx(1.0 / k).epsilon(1e-8));
}

TEST_CASE("kernel rejects the singular point and bad arguments") {
  CHECK_THROWS_AS(green_log(2, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(green_log(3, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(green_log(5, 0.5, 1.0), std::invalid_argument);
}
