// Discretized Brownian paths with optional constant drift, first entry into
// a closed ball, and the Feynman-Kac weight pieces accumulated along the way.
//
// Scheme: x_{j+1} = x_j + drift*dt + sqrt(dt)*xi_j with standard Gaussian
// xi_j. Hitting is checked at discrete positions only and the kill integral
// uses the left endpoint of each step; both biases are O(sqrt(dt)) and are
// controlled by the dt-refinement checks rather than by bridge corrections.
//
// The drift tilt never biases anything: the likelihood ratio of the
// discrete chain under drift mu versus zero drift is exact,
//
//   log_lr = -<mu, x_J> + (1/2)|mu|^2 J dt   after J steps,
//
// because the per-step Gaussian densities N(0,dt) / N(mu dt, dt) telescope.
// So E_tilted[f * exp(log_lr)] = E_untilted[f] for any path functional f of
// the discrete chain, at any dt.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "lyapmc/common.hpp"
#include "lyapmc/environment.hpp"
#include "lyapmc/rng.hpp"
#include "lyapmc/shape.hpp"

namespace lyapmc {

template <int D>
struct PathConfig {
  double dt = 1e-3;
  double t_max = 100.0;
  Vec<D> drift{};  // constant tilt, zero for plain Brownian motion
  u64 seed = 0;

  void check() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("path: dt must be > 0");
    if (!(t_max >= dt)) throw std::invalid_argument("path: t_max must be >= dt");
    if (!std::isfinite(norm_sq<D>(drift))) throw std::invalid_argument("path: drift must be finite");
  }
};

struct HittingResult {
  bool hit = false;
  double H = 0;  // entry time if hit, else the truncation horizon
  i64 steps = 0;
};

struct FKSample {
  HittingResult hitting;
  double integral = 0;  // left-endpoint sum of the kill rate along the path
  double log_lr = 0;    // exact discrete Girsanov correction, 0 when drift = 0
};

// Core walk. `rate` is invoked exactly once per step, in order, at the
// pre-step position; its values are folded into `integral` with weight dt.
// Callers exploit that contract to hook arbitrary per-position accumulators
// (the sausage functional, trace dumps) into the same loop.
template <int D, class Rate>
FKSample walk_until_hit(const PathConfig<D>& cfg, RngStream& rng, Rate&& rate, const Vec<D>& target,
                        double target_radius = 1.0) {
  cfg.check();
  const double r2 = target_radius * target_radius;

  Vec<D> x = zero_vec<D>();
  FKSample out;
  if (norm_sq<D>(sub<D>(target, x)) <= r2) {
    out.hitting = {true, 0.0, 0};
    return out;
  }

  const double sdt = std::sqrt(cfg.dt);
  const auto max_steps = static_cast<i64>(std::ceil(cfg.t_max / cfg.dt - 1e-9));
  const bool tilted = norm_sq<D>(cfg.drift) > 0;

  double integral = 0;
  i64 j = 0;
  while (true) {
    integral += rate(x) * cfg.dt;
    for (int i = 0; i < D; ++i) x[i] += cfg.drift[i] * cfg.dt + sdt * rng.next_normal();
    ++j;
    if (norm_sq<D>(sub<D>(target, x)) <= r2) {
      out.hitting = {true, static_cast<double>(j) * cfg.dt, j};
      break;
    }
    if (j >= max_steps) {
      out.hitting = {false, static_cast<double>(j) * cfg.dt, j};
      break;
    }
  }
  out.integral = integral;
  if (tilted)
    out.log_lr = -dot<D>(cfg.drift, x) + 0.5 * norm_sq<D>(cfg.drift) * (static_cast<double>(j) * cfg.dt);
  return out;
}

// Survival sample against a concrete environment: kill rate eta + V(x) with
// V evaluated through a windowed view of the Poisson cloud.
template <int D>
FKSample simulate_until_hit(const PathConfig<D>& cfg, const Environment<D>& env,
                            const ObstacleShape<D>& shape, double eta, const Vec<D>& y) {
  if (!(eta >= 0)) throw std::invalid_argument("simulate_until_hit: eta must be >= 0");
  RngStream rng(cfg.seed, 0);
  PotentialView<D> view(env, shape);
  return walk_until_hit<D>(cfg, rng, [&](const Vec<D>& x) { return eta + view(x); }, y);
}

// Left-endpoint Riemann sum of the kill rate over a recorded position list.
// Additive over concatenation by construction; exists mostly so tests can
// pin the quadrature convention independently of the walking loop.
template <int D>
double integrate_potential_segment(const Environment<D>& env, const ObstacleShape<D>& shape,
                                   double eta, const std::vector<Vec<D>>& positions, double dt) {
  if (positions.empty()) throw std::invalid_argument("integrate_potential_segment: empty positions");
  PotentialView<D> view(env, shape);
  double s = 0;
  for (const Vec<D>& x : positions) s += (eta + view(x)) * dt;
  return s;
}

// ---------------------------------------------------------------------------
// Wiener sausage functional
//
//   S = integral over space of (1 - exp(-integral_0^H W(Z_s - u) ds)) du,
//
// by midpoint quadrature on a grid of pitch h: accumulate the exposure
// I(u_c) = sum_j dt W(x_j - u_c) per grid cell center u_c, then sum
// h^D (1 - exp(-I)). Averaging exp(-eta H - nu S) over paths reproduces the
// environment average of the FK weight; that identity is what makes this
// the low-variance annealed estimator.

// Exposure accumulator, generic dimension: hash map keyed by grid cell.
// Cost per step is one shape evaluation per grid cell inside the support
// box, so this is the slow-but-general route.
template <int D>
class SausageAccumulator {
 public:
  SausageAccumulator(const ObstacleShape<D>& shape, double pitch)
      : shape_(&shape), h_(pitch), radius_(shape.support_radius()) {
    if (!(pitch > 0)) throw std::invalid_argument("sausage: pitch must be > 0");
    span_ = static_cast<i64>(std::ceil(radius_ / h_)) + 1;
  }

  void add_position(const Vec<D>& x, double dt) {
    CellIndex<D> base;
    for (int i = 0; i < D; ++i) base[i] = static_cast<i64>(std::floor(x[i] / h_));
    CellIndex<D> c;
    scan(x, dt, base, 0, c);
  }

  double total() const {
    double vol = 1;
    for (int i = 0; i < D; ++i) vol *= h_;
    double s = 0;
    for (const auto& kv : exposure_) s += -std::expm1(-kv.second);
    return s * vol;
  }

 private:
  void scan(const Vec<D>& x, double dt, const CellIndex<D>& base, int dim, CellIndex<D>& c) {
    if (dim == D) {
      Vec<D> u;
      for (int i = 0; i < D; ++i) u[i] = x[i] - (static_cast<double>(c[i]) + 0.5) * h_;
      const double w = (*shape_)(u);
      if (w > 0) exposure_[c] += w * dt;
      return;
    }
    for (i64 o = -span_; o <= span_; ++o) {
      c[dim] = base[dim] + o;
      scan(x, dt, base, dim + 1, c);
    }
  }

  const ObstacleShape<D>* shape_;
  double h_, radius_;
  i64 span_;
  std::unordered_map<CellIndex<D>, double, CellIndexHash<D>> exposure_;
};

// One-dimensional radial fast path. W(x - u) as a function of the center u
// is a sum of indicator levels on intervals [x - r_i, x + r_i], so each step
// is two difference-array updates per level instead of a sweep over every
// grid cell under the support. Telescoping the amplitudes keeps this exact
// for non-monotone level sequences too.
class SausageAccumulator1D {
 public:
  SausageAccumulator1D(const ObstacleShape<1>& shape, double pitch) : h_(pitch) {
    if (!(pitch > 0)) throw std::invalid_argument("sausage: pitch must be > 0");
    if (!shape.is_radial())
      throw std::invalid_argument("sausage fast path requires a radial shape");
    const auto& radii = shape.radii();
    const auto& amps = shape.amplitudes();
    levels_.resize(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double next = i + 1 < amps.size() ? amps[i + 1] : 0.0;
      levels_[i] = {radii[i], amps[i] - next};
    }
  }

  void add_position(const Vec<1>& x, double dt) {
    for (const auto& [r, da] : levels_) {
      // grid centers (g + 0.5) h inside [x - r, x + r]
      const i64 glo = static_cast<i64>(std::ceil((x[0] - r) / h_ - 0.5));
      const i64 ghi = static_cast<i64>(std::floor((x[0] + r) / h_ - 0.5));
      if (ghi < glo) continue;
      ensure(glo, ghi + 1);
      diff_[static_cast<std::size_t>(glo - lo_)] += da * dt;
      diff_[static_cast<std::size_t>(ghi + 1 - lo_)] -= da * dt;
    }
  }

  double total() const {
    double s = 0, run = 0;
    for (double d : diff_) {
      run += d;
      s += -std::expm1(-run);
    }
    return s * h_;
  }

 private:
  void ensure(i64 lo, i64 hi) {
    if (diff_.empty()) {
      lo_ = lo - 64;
      diff_.assign(static_cast<std::size_t>(hi - lo + 129), 0.0);
      return;
    }
    if (lo < lo_) {
      const i64 grow = std::max<i64>(64, lo_ - lo);
      diff_.insert(diff_.begin(), static_cast<std::size_t>(grow), 0.0);
      lo_ -= grow;
    }
    const i64 end = lo_ + static_cast<i64>(diff_.size());
    if (hi >= end) {
      const i64 grow = std::max<i64>(64, hi - end + 1);
      diff_.insert(diff_.end(), static_cast<std::size_t>(grow), 0.0);
    }
  }

  double h_;
  std::vector<std::pair<double, double>> levels_;  // (radius, telescoped amplitude)
  std::vector<double> diff_;
  i64 lo_ = 0;
};

template <int D>
struct SausageSample {
  HittingResult hitting;
  double S = 0;  // sausage functional value over the whole path
  double log_lr = 0;
};

template <int D>
SausageSample<D> sausage_functional(const PathConfig<D>& cfg, RngStream& rng,
                                    const ObstacleShape<D>& shape, const Vec<D>& y, double pitch) {
  SausageSample<D> out;
  if constexpr (D == 1) {
    if (shape.is_radial()) {
      SausageAccumulator1D acc(shape, pitch);
      const FKSample fk = walk_until_hit<D>(
          cfg, rng,
          [&](const Vec<D>& x) {
            acc.add_position(x, cfg.dt);
            return 0.0;
          },
          y);
      out.hitting = fk.hitting;
      out.S = acc.total();
      out.log_lr = fk.log_lr;
      return out;
    }
  }
  SausageAccumulator<D> acc(shape, pitch);
  const FKSample fk = walk_until_hit<D>(
      cfg, rng,
      [&](const Vec<D>& x) {
        acc.add_position(x, cfg.dt);
        return 0.0;
      },
      y);
  out.hitting = fk.hitting;
  out.S = acc.total();
  out.log_lr = fk.log_lr;
  return out;
}

template <int D>
SausageSample<D> sausage_functional(const PathConfig<D>& cfg, const ObstacleShape<D>& shape,
                                    const Vec<D>& y, double pitch) {
  RngStream rng(cfg.seed, 0);
  return sausage_functional(cfg, rng, shape, y, pitch);
}

}  // namespace lyapmc
