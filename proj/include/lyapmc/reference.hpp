// Closed-form and quadrature baselines for the constant potential eta > 0.
// Everything here is deterministic; the Monte Carlo side is validated
// against these values, never the other way around.
#pragma once

#include <cmath>
#include <stdexcept>

#include "lyapmc/common.hpp"
#include "lyapmc/quadrature.hpp"

namespace lyapmc {

// Principal Dirichlet eigenvalue of -(1/2) Laplacian on the unit ball.
// d=2 uses the first zero of the Bessel function J0.
inline double dirichlet_eigenvalue(int d) {
  constexpr double kPi = 3.14159265358979323846;
  constexpr double kJ01 = 2.404825557695773;
  switch (d) {
    case 1: return kPi * kPi / 8.0;
    case 2: return kJ01 * kJ01 / 2.0;
    case 3: return kPi * kPi / 2.0;
  }
  throw std::invalid_argument("dirichlet_eigenvalue: dim must be 1, 2 or 3");
}

// Exponential rate of decay of the constant-potential survival weight:
// alpha(y) = sqrt(2 eta) |y|.
inline double alpha_const(double eta, double dist) {
  if (!(eta >= 0)) throw std::invalid_argument("alpha_const: eta must be >= 0");
  return std::sqrt(2.0 * eta) * dist;
}

template <int D>
double alpha_const(double eta, const Vec<D>& y) {
  return alpha_const(eta, norm<D>(y));
}

// Laplace transform of the first passage time to distance L for a driftless
// one-dimensional Brownian motion: E[exp(-eta H_L)] = exp(-L sqrt(2 eta)).
inline double hitting_laplace_1d(double eta, double L) {
  if (!(eta >= 0) || !(L >= 0)) throw std::invalid_argument("hitting_laplace_1d: bad arguments");
  return std::exp(-L * std::sqrt(2.0 * eta));
}

namespace green_detail {
// ln of  integral_0^inf exp(-z u^2) phi_d(u) du  after substituting
// t = 1 + u^2 into the kernel representation
//
//   g_d(l) = c_d integral_1^inf exp(-k l t) (t^2-1)^{(d-3)/2} dt .
//
// The substitution absorbs the d=2 endpoint singularity: with t^2-1 =
// u^2 (u^2+2) the integrand becomes smooth,
//
//   phi_2(u) = 2 / sqrt(u^2 + 2),    phi_3(u) = 2 u,
//
// and exp(-kl) can be factored out so the remaining integral stays well
// scaled however large k l gets.
inline double ln_tail_integral(int d, double z) {
  auto phi = [d](double u) {
    return d == 2 ? 2.0 / std::sqrt(u * u + 2.0) : 2.0 * u;
  };
  // Gaussian factor: beyond u^2 ~ 45/z the integrand is below 1e-19 of peak.
  const double i = integrate_to_infinity(
      [&](double u) { return std::exp(-z * u * u) * phi(u); }, 0.0, 1e-9);
  return std::log(i);
}
}  // namespace green_detail

// ln g_d(l; eta) for the two-sided Green kernel of eta - (1/2) Laplacian at
// separation l > 0. Log space keeps the value usable far past the range
// where g itself underflows (k l of a few hundred and beyond).
inline double green_log(int d, double eta, double l) {
  if (!(eta > 0)) throw std::invalid_argument("green_log: eta must be > 0");
  if (!(l > 0)) throw std::invalid_argument("green_log: separation must be > 0");
  const double k = std::sqrt(2.0 * eta);
  const double kl = k * l;
  switch (d) {
    case 1:
      return -kl - std::log(k);
    case 2:
      // c_2 = 1/pi
      return -kl + green_detail::ln_tail_integral(2, kl) - std::log(3.14159265358979323846);
    case 3:
      // c_3 = k / (2 pi)
      return -kl + green_detail::ln_tail_integral(3, kl) + std::log(k / (2.0 * 3.14159265358979323846));
  }
  throw std::invalid_argument("green_log: dim must be 1, 2 or 3");
}

inline double green_const(int d, double eta, double l) { return std::exp(green_log(d, eta, l)); }

// Two-point form; the kernel depends only on the separation.
template <int D>
double green_const(double eta, const Vec<D>& x, const Vec<D>& y) {
  return green_const(D, eta, norm<D>(sub<D>(x, y)));
}

// Ratio  l^{-(d-1)/2} exp(-k l) / g_d(l).  Flat in l up to O(1/l)
// corrections; its limits are k (d=1), sqrt(2 pi k) (d=2), 2 pi (d=3).
inline double green_asymptotic_ratio(int d, double eta, double l) {
  const double k = std::sqrt(2.0 * eta);
  const double ln_ratio = -0.5 * (d - 1) * std::log(l) - k * l - green_log(d, eta, l);
  return std::exp(ln_ratio);
}

}  // namespace lyapmc
