// Lattice upper envelope of an obstacle profile at dyadic resolution 2^-k.
//
// The table entry at integer offset m is
//
//   T[m] = sup { W(u) : u in [(m_i-1)h, (m_i+1)h]^D },  h = 2^-k,
//
// which is an upper bound for W(x - p) whenever x and p fall in lattice
// cells differing by m. Dyadic levels nest, so refining k can only lower
// every entry, and T[m] -> W at continuity points. Both facts are exercised
// by the property tests; neither is approximate.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lyapmc/common.hpp"
#include "lyapmc/environment.hpp"
#include "lyapmc/shape.hpp"

namespace lyapmc {

template <int D>
class DiscretizedShape {
 public:
  int level() const { return level_; }
  double pitch() const { return pitch_; }
  i64 extent() const { return extent_; }
  std::size_t table_size() const { return table_.size(); }

  // Offsets beyond the stored extent are exactly zero by construction.
  double table_at(const CellIndex<D>& m) const {
    std::size_t flat = 0;
    for (int i = 0; i < D; ++i) {
      if (m[i] < -extent_ || m[i] > extent_) return 0.0;
      flat = flat * side_ + static_cast<std::size_t>(m[i] + extent_);
    }
    return table_[flat];
  }

  // Upper bound for W(x - p) given only the lattice cells of x and p.
  double envelope(const Vec<D>& x, const Vec<D>& p) const {
    CellIndex<D> m;
    for (int i = 0; i < D; ++i)
      m[i] = static_cast<i64>(std::floor(x[i] / pitch_)) - static_cast<i64>(std::floor(p[i] / pitch_));
    return table_at(m);
  }

  // Distance beyond which envelope() is guaranteed zero. Slightly larger
  // than the profile's own support because cell pairs blur positions by up
  // to one cell diagonal on each side.
  double reach() const { return reach_; }

  template <int E>
  friend DiscretizedShape<E> discretize_shape(const ObstacleShape<E>&, int, std::size_t);

 private:
  int level_ = 0;
  double pitch_ = 1;
  i64 extent_ = 0;
  std::size_t side_ = 0;
  double reach_ = 0;
  std::vector<double> table_;
};

template <int D>
DiscretizedShape<D> discretize_shape(const ObstacleShape<D>& shape, int level,
                                     std::size_t max_bytes = std::size_t(64) << 20) {
  if (level < 0 || level > 40) throw std::invalid_argument("discretize_shape: level out of range");

  DiscretizedShape<D> d;
  d.level_ = level;
  d.pitch_ = std::ldexp(1.0, -level);
  const double h = d.pitch_;
  const double R = shape.support_radius();
  d.extent_ = static_cast<i64>(std::ceil(R / h)) + 1;
  d.side_ = static_cast<std::size_t>(2 * d.extent_ + 1);
  d.reach_ = R + 2.0 * h * std::sqrt(static_cast<double>(D));

  std::size_t n = 1;
  for (int i = 0; i < D; ++i) {
    if (n > max_bytes / d.side_) n = max_bytes;  // saturate, caught below
    else n *= d.side_;
  }
  if (n > max_bytes / sizeof(double))
    throw std::length_error("discretize_shape: level " + std::to_string(level) + " table needs " +
                            std::to_string(d.side_) + "^" + std::to_string(D) +
                            " entries, over the " + std::to_string(max_bytes >> 20) + " MiB budget");

  d.table_.resize(n);
  CellIndex<D> m;
  for (int i = 0; i < D; ++i) m[i] = -d.extent_;
  for (std::size_t flat = 0; flat < n; ++flat) {
    Vec<D> lo, hi;
    for (int i = 0; i < D; ++i) {
      lo[i] = (static_cast<double>(m[i]) - 1.0) * h;
      hi[i] = (static_cast<double>(m[i]) + 1.0) * h;
    }
    d.table_[flat] = shape.sup_over_box(lo, hi);
    for (int i = D - 1; i >= 0; --i) {
      if (++m[i] <= d.extent_) break;
      m[i] = -d.extent_;
    }
  }
  return d;
}

// Potential sum evaluated through the lattice envelope instead of the exact
// profile. Dominates potential_at(env, shape, x) pointwise for every seed
// and every x; the acceptance sweep checks exactly that.
template <int D>
double discretized_potential_at(const Environment<D>& env, const DiscretizedShape<D>& dshape,
                                const Vec<D>& x) {
  double v = 0;
  env.for_points_near(x, dshape.reach(), [&](const Vec<D>& p) { v += dshape.envelope(x, p); });
  return v;
}

}  // namespace lyapmc
