// Single-obstacle profiles W >= 0 with compact support. Three kinds:
//
//   ball indicator   W = a * 1{|u| <= r}
//   radial step      W = a_i on the shell r_{i-1} < |u| <= r_i  (r_0 = 0)
//   grid table       W constant on the cells of a centered cubic grid
//
// All norms and the support radius are computed in closed form so estimator
// bounds built from them are exact, not sampled.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lyapmc/common.hpp"

namespace lyapmc {

enum class ShapeKind { BallIndicator, RadialStep, GridTable };

inline const char* shape_kind_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::BallIndicator: return "ball-indicator";
    case ShapeKind::RadialStep: return "radial-step";
    case ShapeKind::GridTable: return "grid-table";
  }
  return "?";
}

struct ShapeParams {
  std::vector<double> radii;       // radial kinds
  std::vector<double> amplitudes;  // radial kinds
  double pitch = 0;                // grid-table
  int cells_per_dim = 0;           // grid-table
  std::vector<double> values;      // grid-table, row-major, size n^D
};

template <int D>
class ObstacleShape {
  static_assert(D >= 1 && D <= 3, "supported dimensions are 1, 2, 3");

 public:
  static ObstacleShape ball_indicator(double radius, double amplitude) {
    return radial_step({radius}, {amplitude});
  }

  static ObstacleShape radial_step(std::vector<double> radii, std::vector<double> amplitudes) {
    ObstacleShape s;
    s.kind_ = radii.size() == 1 ? ShapeKind::BallIndicator : ShapeKind::RadialStep;
    s.radii_ = std::move(radii);
    s.amps_ = std::move(amplitudes);
    s.validate_radial();
    s.finish_radial();
    return s;
  }

  // Values are row-major over a grid of cells_per_dim^D cells covering the
  // centered cube of side cells_per_dim * pitch. Cells are half-open on the
  // right in every coordinate.
  static ObstacleShape grid_table(double pitch, int cells_per_dim, std::vector<double> values) {
    ObstacleShape s;
    s.kind_ = ShapeKind::GridTable;
    s.pitch_ = pitch;
    s.n_ = cells_per_dim;
    s.values_ = std::move(values);
    s.validate_grid();
    s.finish_grid();
    return s;
  }

  ShapeKind kind() const { return kind_; }
  bool is_radial() const { return kind_ != ShapeKind::GridTable; }

  double operator()(const Vec<D>& u) const {
    if (kind_ == ShapeKind::GridTable) return grid_value(u);
    return radial_value(norm<D>(u));
  }

  double radial_value(double dist) const {
    auto it = std::lower_bound(radii_.begin(), radii_.end(), dist);
    if (it == radii_.end()) return 0.0;
    return amps_[static_cast<std::size_t>(it - radii_.begin())];
  }

  double support_radius() const { return support_radius_; }
  double l1_norm() const { return l1_; }
  double linf_norm() const { return linf_; }

  const std::vector<double>& radii() const { return radii_; }
  const std::vector<double>& amplitudes() const { return amps_; }
  double grid_pitch() const { return pitch_; }
  int grid_cells_per_dim() const { return n_; }
  const std::vector<double>& grid_values() const { return values_; }

  // Exact supremum of W over the axis-aligned box [lo, hi]. This is what the
  // discretizer tabulates; exactness here is what makes the dominating-table
  // property an identity rather than an approximation.
  double sup_over_box(const Vec<D>& lo, const Vec<D>& hi) const {
    for (int i = 0; i < D; ++i)
      if (!(lo[i] <= hi[i])) throw std::invalid_argument("sup_over_box: empty box");
    if (kind_ == ShapeKind::GridTable) return grid_sup(lo, hi);

    // Distance from origin to the box and to its farthest corner. The image
    // of a connected box under |.| is the full interval [dmin, dmax].
    double dmin_sq = 0, dmax_sq = 0;
    for (int i = 0; i < D; ++i) {
      const double below = lo[i] > 0 ? lo[i] : 0;
      const double above = hi[i] < 0 ? -hi[i] : 0;
      const double near = below > above ? below : above;
      dmin_sq += near * near;
      const double far = std::max(std::abs(lo[i]), std::abs(hi[i]));
      dmax_sq += far * far;
    }
    const double dmin = std::sqrt(dmin_sq), dmax = std::sqrt(dmax_sq);

    double best = 0.0;
    double prev_r = 0.0;
    for (std::size_t i = 0; i < radii_.size(); ++i) {
      // Shell i carries value amps_[i] on (prev_r, radii_[i]], with the
      // innermost shell closed at 0.
      const bool touches = (radii_[i] >= dmin) && (i == 0 ? dmin <= dmax : prev_r < dmax);
      if (touches) best = std::max(best, amps_[i]);
      prev_r = radii_[i];
      if (prev_r >= dmax) break;
    }
    return best;
  }

  // Same shape with every amplitude multiplied by c > 0. Scaling schedules
  // use this to form W_n = c_n * W.
  ObstacleShape scaled_by(double c) const {
    if (!(c > 0) || !std::isfinite(c))
      throw std::invalid_argument("scaled_by: factor must be positive and finite");
    ObstacleShape s(*this);
    for (double& a : s.amps_) a *= c;
    for (double& v : s.values_) v *= c;
    s.l1_ *= c;
    s.linf_ *= c;
    return s;
  }

 private:
  ObstacleShape() = default;

  void validate_radial() {
    if (radii_.empty() || radii_.size() != amps_.size())
      throw std::invalid_argument("shape: radii and amplitudes must match and be nonempty");
    double prev = 0;
    for (double r : radii_) {
      if (!(r > prev) || !std::isfinite(r))
        throw std::invalid_argument("shape: radii must be finite, positive, strictly increasing");
      prev = r;
    }
    bool any = false;
    for (double a : amps_) {
      if (!(a >= 0) || !std::isfinite(a))
        throw std::invalid_argument("shape: amplitudes must be finite and nonnegative");
      any = any || a > 0;
    }
    if (!any) throw std::invalid_argument("shape: identically zero profile rejected");
  }

  void finish_radial() {
    support_radius_ = 0;
    l1_ = 0;
    linf_ = 0;
    double prev = 0;
    for (std::size_t i = 0; i < radii_.size(); ++i) {
      const double r = radii_[i], a = amps_[i];
      l1_ += a * unit_ball_volume(D) * (std::pow(r, D) - std::pow(prev, D));
      if (a > 0) {
        support_radius_ = r;
        linf_ = std::max(linf_, a);
      }
      prev = r;
    }
  }

  void validate_grid() {
    if (!(pitch_ > 0) || !std::isfinite(pitch_))
      throw std::invalid_argument("shape: grid pitch must be positive and finite");
    if (n_ < 1 || n_ > 4096) throw std::invalid_argument("shape: cells_per_dim out of range");
    std::size_t want = 1;
    for (int i = 0; i < D; ++i) {
      want *= static_cast<std::size_t>(n_);
      if (want > (std::size_t(1) << 27))
        throw std::invalid_argument("shape: grid table too large");
    }
    if (values_.size() != want)
      throw std::invalid_argument("shape: grid values size must be cells_per_dim^dim, got " +
                                  std::to_string(values_.size()));
    bool any = false;
    for (double v : values_) {
      if (!(v >= 0) || !std::isfinite(v))
        throw std::invalid_argument("shape: grid values must be finite and nonnegative");
      any = any || v > 0;
    }
    if (!any) throw std::invalid_argument("shape: identically zero profile rejected");
  }

  void finish_grid() {
    half_ = 0.5 * pitch_ * n_;
    double cellvol = 1;
    for (int i = 0; i < D; ++i) cellvol *= pitch_;
    l1_ = 0;
    linf_ = 0;
    support_radius_ = 0;
    for (std::size_t flat = 0; flat < values_.size(); ++flat) {
      const double v = values_[flat];
      l1_ += v * cellvol;
      if (v <= 0) continue;
      linf_ = std::max(linf_, v);
      // farthest corner of this cell from the origin
      std::size_t rest = flat;
      double far_sq = 0;
      for (int i = D - 1; i >= 0; --i) {
        const auto idx = static_cast<i64>(rest % static_cast<std::size_t>(n_));
        rest /= static_cast<std::size_t>(n_);
        const double clo = static_cast<double>(idx) * pitch_ - half_;
        const double chi = clo + pitch_;
        const double far = std::max(std::abs(clo), std::abs(chi));
        far_sq += far * far;
      }
      support_radius_ = std::max(support_radius_, std::sqrt(far_sq));
    }
  }

  double grid_value(const Vec<D>& u) const {
    std::size_t flat = 0;
    for (int i = 0; i < D; ++i) {
      const double t = u[i] + half_;
      if (t < 0 || t >= pitch_ * n_) return 0.0;
      auto idx = static_cast<i64>(t / pitch_);
      if (idx >= n_) idx = n_ - 1;  // guard rounding at the outer boundary
      flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx);
    }
    return values_[flat];
  }

  double grid_sup(const Vec<D>& lo, const Vec<D>& hi) const {
    i64 ilo[D], ihi[D];
    for (int i = 0; i < D; ++i) {
      const double tlo = lo[i] + half_, thi = hi[i] + half_;
      if (thi < 0 || tlo >= pitch_ * n_) return 0.0;
      ilo[i] = std::max<i64>(0, static_cast<i64>(std::floor(tlo / pitch_)));
      ihi[i] = std::min<i64>(n_ - 1, static_cast<i64>(std::floor(thi / pitch_)));
      if (ihi[i] < ilo[i]) return 0.0;
    }
    double best = 0.0;
    i64 idx[D];
    for (int i = 0; i < D; ++i) idx[i] = ilo[i];
    while (true) {
      std::size_t flat = 0;
      for (int i = 0; i < D; ++i) flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx[i]);
      best = std::max(best, values_[flat]);
      int i = D - 1;
      for (; i >= 0; --i) {
        if (++idx[i] <= ihi[i]) break;
        idx[i] = ilo[i];
      }
      if (i < 0) break;
    }
    return best;
  }

  ShapeKind kind_ = ShapeKind::BallIndicator;
  std::vector<double> radii_, amps_;      // radial kinds
  double pitch_ = 0;                      // grid-table
  int n_ = 0;
  double half_ = 0;
  std::vector<double> values_;
  double support_radius_ = 0, l1_ = 0, linf_ = 0;
};

// Compact textual identity of a shape, used in config fingerprints.
template <int D>
std::string signature(const ObstacleShape<D>& s) {
  std::string out = shape_kind_name(s.kind());
  out += ":d";
  out += std::to_string(D);
  if (s.is_radial()) {
    out += ":r";
    for (double r : s.radii()) (out += ',') += format_double(r);
    out += ":a";
    for (double a : s.amplitudes()) (out += ',') += format_double(a);
  } else {
    out += ":p";
    out += format_double(s.grid_pitch());
    out += ":n";
    out += std::to_string(s.grid_cells_per_dim());
    out += ":v";
    for (double v : s.grid_values()) (out += ',') += format_double(v);
  }
  return out;
}

template <int D>
ObstacleShape<D> make_shape(ShapeKind kind, const ShapeParams& p) {
  switch (kind) {
    case ShapeKind::BallIndicator:
      if (p.radii.size() != 1 || p.amplitudes.size() != 1)
        throw std::invalid_argument("make_shape: ball-indicator takes one radius and one amplitude");
      return ObstacleShape<D>::ball_indicator(p.radii[0], p.amplitudes[0]);
    case ShapeKind::RadialStep:
      return ObstacleShape<D>::radial_step(p.radii, p.amplitudes);
    case ShapeKind::GridTable:
      return ObstacleShape<D>::grid_table(p.pitch, p.cells_per_dim, p.values);
  }
  throw std::invalid_argument("make_shape: unknown kind");
}

}  // namespace lyapmc
