// Poisson cloud of obstacle centers, materialized lazily one lattice cell at
// a time. The content of a cell is a pure function of (master seed, cell
// coordinates), so any two queries agree regardless of which was first, which
// thread asked, or whether the cache was dropped in between.
#pragma once

#include <mutex>
#include <ostream>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "lyapmc/common.hpp"
#include "lyapmc/rng.hpp"
#include "lyapmc/shape.hpp"

namespace lyapmc {

template <int D>
class Environment {
 public:
  Environment(double intensity, u64 master_seed, double cell_size)
      : intensity_(intensity), seed_(master_seed), cell_size_(cell_size) {
    if (!(intensity_ >= 0) || !std::isfinite(intensity_))
      throw std::invalid_argument("environment: intensity must be finite and >= 0");
    if (!(cell_size_ > 0) || !std::isfinite(cell_size_))
      throw std::invalid_argument("environment: cell_size must be positive");
  }

  // Copies share nothing; the cache refills on demand and regenerates the
  // exact same points, so a copy is just a cheap handle to the same cloud.
  Environment(const Environment& o) : intensity_(o.intensity_), seed_(o.seed_), cell_size_(o.cell_size_) {}
  Environment& operator=(const Environment&) = delete;

  double intensity() const { return intensity_; }
  u64 master_seed() const { return seed_; }
  double cell_size() const { return cell_size_; }

  // Obstacle centers in cell c; reference stays valid for the lifetime of
  // the environment (node-based map, nodes never move).
  const std::vector<Vec<D>>& cell_points(const CellIndex<D>& c) const {
    {
      std::shared_lock lock(mu_);
      auto it = cells_.find(c);
      if (it != cells_.end()) return it->second;
    }
    std::vector<Vec<D>> pts = generate_cell(c);
    std::unique_lock lock(mu_);
    // try_emplace: if another thread won the race the contents are identical
    // by construction, keep theirs.
    auto [it, inserted] = cells_.try_emplace(c, std::move(pts));
    return it->second;
  }

  // Visit every center within distance `radius` of x (plus boundary-cell
  // stragglers, which the caller's kernel must tolerate by vanishing there).
  template <class F>
  void for_points_near(const Vec<D>& x, double radius, F&& visit) const {
    const double r2 = radius * radius;
    const i64 scan = static_cast<i64>(std::ceil(radius / cell_size_));
    CellIndex<D> c = cell_of<D>(x, cell_size_);
    CellIndex<D> idx;
    visit_cells(c, scan, 0, idx, [&](const CellIndex<D>& cc) {
      for (const Vec<D>& p : cell_points(cc)) {
        if (norm_sq<D>(sub<D>(x, p)) <= r2) visit(p);
      }
    });
  }

  i64 points_generated() const {
    std::shared_lock lock(mu_);
    i64 n = 0;
    for (const auto& kv : cells_) n += static_cast<i64>(kv.second.size());
    return n;
  }

 private:
  template <class F>
  void visit_cells(const CellIndex<D>& center, i64 scan, int dim, CellIndex<D>& idx, F&& f) const {
    if (dim == D) {
      f(idx);
      return;
    }
    for (i64 o = -scan; o <= scan; ++o) {
      idx[dim] = center[dim] + o;
      visit_cells(center, scan, dim + 1, idx, f);
    }
  }

  std::vector<Vec<D>> generate_cell(const CellIndex<D>& c) const {
    u64 sid = splitmix64(stream_tag::kCell);
    for (int i = 0; i < D; ++i) sid = hash_combine(sid, static_cast<u64>(c[i]));
    RngStream rng(seed_, sid);

    double vol = 1;
    for (int i = 0; i < D; ++i) vol *= cell_size_;
    const i64 count = rng.next_poisson(intensity_ * vol);

    std::vector<Vec<D>> pts(static_cast<std::size_t>(count));
    for (auto& p : pts)
      for (int i = 0; i < D; ++i)
        p[i] = (static_cast<double>(c[i]) + rng.next_unit()) * cell_size_;
    return pts;
  }

  double intensity_;
  u64 seed_;
  double cell_size_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<CellIndex<D>, std::vector<Vec<D>>, CellIndexHash<D>> cells_;
};

// Total potential at x: sum of the profile over all centers near enough to
// contribute. Centers at distance exactly support_radius still count; the
// shape itself decides its boundary values.
template <int D>
double potential_at(const Environment<D>& env, const ObstacleShape<D>& shape, const Vec<D>& x) {
  double v = 0;
  env.for_points_near(x, shape.support_radius(), [&](const Vec<D>& p) { v += shape(sub<D>(x, p)); });
  return v;
}

// Expected potential at any fixed point, nu * ||W||_1 by Campbell's formula.
template <int D>
double mean_potential(const ObstacleShape<D>& shape, double intensity) {
  return intensity * shape.l1_norm();
}

// Dump every center inside the box [lo, hi] as CSV (header x1..xd, one
// center per row), cells visited in lexicographic order so the output is
// reproducible. Debugging aid for eyeballing a cloud.
template <int D>
void write_points_csv(const Environment<D>& env, const Vec<D>& lo, const Vec<D>& hi,
                      std::ostream& os) {
  for (int i = 0; i < D; ++i)
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("write_points_csv: empty box");
  for (int i = 0; i < D; ++i) os << (i ? ",x" : "x") << (i + 1);
  os << '\n';
  const CellIndex<D> clo = cell_of<D>(lo, env.cell_size());
  const CellIndex<D> chi = cell_of<D>(hi, env.cell_size());
  CellIndex<D> c = clo;
  while (true) {
    for (const Vec<D>& p : env.cell_points(c)) {
      bool inside = true;
      for (int i = 0; i < D; ++i) inside = inside && p[i] >= lo[i] && p[i] <= hi[i];
      if (!inside) continue;
      for (int i = 0; i < D; ++i) os << (i ? "," : "") << format_double(p[i]);
      os << '\n';
    }
    int i = D - 1;
    for (; i >= 0; --i) {
      if (++c[i] <= chi[i]) break;
      c[i] = clo[i];
    }
    if (i < 0) break;
  }
}

// Potential evaluation along a sample path hits the same handful of cells
// step after step. The view keeps a flattened copy of the centers in the
// window around the current cell and only re-gathers when the path crosses
// a cell boundary.
template <int D>
class PotentialView {
 public:
  PotentialView(const Environment<D>& env, const ObstacleShape<D>& shape)
      : env_(&env),
        shape_(&shape),
        radius_(shape.support_radius()),
        r2_(radius_ * radius_),
        radial_(shape.is_radial()) {
    scan_ = static_cast<i64>(std::ceil(radius_ / env.cell_size()));
  }

  double operator()(const Vec<D>& x) {
    const CellIndex<D> c = cell_of<D>(x, env_->cell_size());
    if (!valid_ || c != center_) regather(c);
    double v = 0;
    if (radial_) {
      for (const Vec<D>& p : window_) {
        const double d2 = norm_sq<D>(sub<D>(x, p));
        if (d2 <= r2_) v += shape_->radial_value(std::sqrt(d2));
      }
    } else {
      for (const Vec<D>& p : window_) {
        const Vec<D> u = sub<D>(x, p);
        if (norm_sq<D>(u) <= r2_) v += (*shape_)(u);
      }
    }
    return v;
  }

 private:
  void regather(const CellIndex<D>& c) {
    window_.clear();
    CellIndex<D> idx;
    gather(c, 0, idx);
    center_ = c;
    valid_ = true;
  }

  void gather(const CellIndex<D>& c, int dim, CellIndex<D>& idx) {
    if (dim == D) {
      const auto& pts = env_->cell_points(idx);
      window_.insert(window_.end(), pts.begin(), pts.end());
      return;
    }
    for (i64 o = -scan_; o <= scan_; ++o) {
      idx[dim] = c[dim] + o;
      gather(c, dim + 1, idx);
    }
  }

  const Environment<D>* env_;
  const ObstacleShape<D>* shape_;
  double radius_, r2_;
  bool radial_;
  i64 scan_;
  CellIndex<D> center_{};
  bool valid_ = false;
  std::vector<Vec<D>> window_;
};

}  // namespace lyapmc
