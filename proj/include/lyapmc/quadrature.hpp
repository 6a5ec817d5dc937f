// Adaptive Gauss-Kronrod 7-15 on finite intervals, plus a semi-infinite
// wrapper. Node and weight tables are the classical 15-point Kronrod set.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace lyapmc {

namespace gk_detail {
// Kronrod abscissae on [0,1] side of the symmetric rule; last entry is 0.
// Odd indices are the embedded 7-point Gauss nodes.
inline constexpr double xgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double wgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Panel {
  double a, b, value, error;
};

template <class F>
Panel eval_panel(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = wgk[7] * fc;
  double gauss = wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * xgk[i];
    const double fsum = f(c - dx) + f(c + dx);
    kron += wgk[i] * fsum;
    if (i % 2 == 1) gauss += wg[i / 2] * fsum;
  }
  kron *= h;
  gauss *= h;
  return Panel{a, b, kron, std::abs(kron - gauss)};
}
}  // namespace gk_detail

// Integrate f over [a, b] to relative tolerance rel_tol (with abs_tol as a
// floor for integrals near zero). Throws if the budget of panel splits is
// exhausted before the error estimate converges.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 0.0,
                 int max_panels = 2000) {
  if (!(a <= b)) throw std::invalid_argument("integrate: bad interval");
  if (a == b) return 0.0;

  std::vector<gk_detail::Panel> panels;
  panels.push_back(gk_detail::eval_panel(f, a, b));
  while (true) {
    double total = 0, err = 0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].value;
      err += panels[i].error;
      if (panels[i].error > panels[worst].error) worst = i;
    }
    if (err <= rel_tol * std::abs(total) + abs_tol) return total;
    if (static_cast<int>(panels.size()) >= max_panels)
      throw std::runtime_error("integrate: panel budget exhausted before tolerance");
    const gk_detail::Panel split = panels[worst];
    const double mid = 0.5 * (split.a + split.b);
    panels[worst] = gk_detail::eval_panel(f, split.a, mid);
    panels.push_back(gk_detail::eval_panel(f, mid, split.b));
  }
}

// Integrate f over [a, infinity) for integrands with (at least) exponential
// decay: panels of doubling width are added until one contributes less than
// rel_tol times the running total.
template <class F>
double integrate_to_infinity(F&& f, double a, double rel_tol = 1e-10) {
  double total = 0;
  double lo = a, width = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double hi = lo + width;
    const double piece = integrate(f, lo, hi, rel_tol * 0.1, 0.0);
    total += piece;
    if (i > 2 && std::abs(piece) <= rel_tol * std::abs(total)) return total;
    lo = hi;
    width *= 2;
  }
  throw std::runtime_error("integrate_to_infinity: no convergence, integrand decays too slowly");
}

}  // namespace lyapmc
