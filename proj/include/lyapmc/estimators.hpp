// Estimators for the survival weight e(y, eta+V), its log a, the quenched
// exponent alpha (environment-averaged a(n y)/n), the annealed exponent beta
// (two independent routes), scaling sweeps, and the closed-form bounds.
//
// Estimator conventions, fixed once here:
//   e      mean over paths of exp(log_lr - integral), truncated paths
//          contribute weight 0 and are counted.
//   a      -ln of the e mean, errors by the delta method.
//   alpha  mean over environments of a(n_dist y_dir) / n_dist; environments
//          whose e mean collapses to 0 are excluded and counted, the run is
//          invalid if more than 1% drop out.
//   beta   -ln of the pooled mean / n_dist. Direct route pools env x path
//          weights with a cluster (per-environment) standard error; the
//          sausage route needs no environments at all and averages
//          exp(-eta H - nu S + log_lr) over paths.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lyapmc/common.hpp"
#include "lyapmc/diffusion.hpp"
#include "lyapmc/environment.hpp"
#include "lyapmc/estimate.hpp"
#include "lyapmc/parallel.hpp"
#include "lyapmc/reference.hpp"
#include "lyapmc/rng.hpp"
#include "lyapmc/shape.hpp"

namespace lyapmc {

struct McConfig {
  double dt = 1e-3;
  double t_max = 0;             // 0: auto-sized from distance, tilt and kill rate
  double sausage_pitch = 1.0 / 64;
  double cell_size = 0;         // 0: max(1, support radius)
  std::optional<double> drift;  // tilt magnitude toward the target; unset: default tilt
  u64 master_seed = 1;
  u64 stream_salt = 0;  // lets nested experiments keep their streams disjoint
  int workers = 1;
  i64 block_size = 1024;  // reduction granularity, part of the determinism contract
};

// The natural rare-event tilt: the decay rate the upper bound predicts.
template <int D>
double default_tilt(const ObstacleShape<D>& shape, double nu, double eta) {
  return std::sqrt(2.0 * (eta + nu * shape.l1_norm()));
}

// Horizon heuristic. Tilted walks cross distance L in about L/mu; untilted
// walks only matter while the kill weight exp(-kappa t) still contributes to
// the estimate, so the horizon is set where the truncated tail is orders of
// magnitude below the surviving mass. The truncated fraction is reported with
// every estimate, so a bad guess is visible, not silent.
inline double auto_t_max(double distance, double tilt, double kill_rate) {
  const double L = distance > 0 ? distance : 0;
  if (tilt > 1e-9) return (4.0 * L + 16.0) / tilt;
  if (kill_rate > 1e-12) return (std::sqrt(2.0 * kill_rate) * L + 14.0) / kill_rate;
  return 8.0 * L * L + 128.0;
}

namespace mc_detail {

template <int D>
struct ResolvedRun {
  PathConfig<D> path;  // seed filled per sample
  double tilt = 0;
  double cell_size = 1;
};

template <int D>
ResolvedRun<D> resolve(const McConfig& cfg, const ObstacleShape<D>& shape, double nu, double eta,
                       const Vec<D>& y) {
  ResolvedRun<D> r;
  const double dist = norm<D>(y);
  r.tilt = cfg.drift ? *cfg.drift : default_tilt(shape, nu, eta);
  if (!(r.tilt >= 0) || !std::isfinite(r.tilt))
    throw std::invalid_argument("estimator: tilt must be finite and >= 0");
  r.path.dt = cfg.dt;
  r.path.t_max = cfg.t_max > 0 ? cfg.t_max : auto_t_max(dist - 1.0, r.tilt, eta + nu * shape.l1_norm());
  if (r.path.t_max < cfg.dt) r.path.t_max = cfg.dt;
  r.path.drift = dist > 0 ? scaled<D>(y, r.tilt / dist) : zero_vec<D>();
  r.cell_size = cfg.cell_size > 0 ? cfg.cell_size : std::max(1.0, shape.support_radius());
  return r;
}

template <int D>
Fingerprint base_fingerprint(const char* tag, const ObstacleShape<D>& shape, double nu, double eta,
                             const Vec<D>& y, const McConfig& cfg, const ResolvedRun<D>& run) {
  Fingerprint fp;
  fp.raw("est", tag).field("dim", static_cast<i64>(D));
  fp.field("shape", signature(shape)).field("nu", nu).field("eta", eta);
  std::string ys;
  for (int i = 0; i < D; ++i) (ys += ',') += format_double(y[i]);
  fp.field("y", ys);
  fp.field("dt", run.path.dt).field("t_max", run.path.t_max).field("tilt", run.tilt);
  fp.field("cell", run.cell_size).field("seed", cfg.master_seed).field("salt", cfg.stream_salt);
  fp.field("block", cfg.block_size);
  return fp;
}

// Mean FK weight over n_paths against one fixed environment; sequential so
// per-environment results never depend on scheduling.
template <int D>
Accumulator fk_weights_one_env(const Environment<D>& env, const ObstacleShape<D>& shape, double eta,
                               const Vec<D>& y, i64 n_paths, const ResolvedRun<D>& run,
                               u64 master_seed, u64 path_salt) {
  PotentialView<D> view(env, shape);
  PathConfig<D> pc = run.path;
  Accumulator acc;
  for (i64 i = 0; i < n_paths; ++i) {
    RngStream rng(master_seed, make_stream_id(stream_tag::kPath, path_salt, static_cast<u64>(i)));
    const FKSample s =
        walk_until_hit<D>(pc, rng, [&](const Vec<D>& x) { return eta + view(x); }, y);
    acc.add(s.hitting.hit ? std::exp(s.log_lr - s.integral) : 0.0, !s.hitting.hit);
  }
  return acc;
}

inline u64 env_seed(u64 master_seed, u64 salt, i64 index) {
  return splitmix64(master_seed ^ make_stream_id(stream_tag::kEnvironment, salt, static_cast<u64>(index)));
}

}  // namespace mc_detail

template <int D>
Estimate estimate_e(const Environment<D>& env, const ObstacleShape<D>& shape, double eta,
                    const Vec<D>& y, i64 n_paths, const McConfig& cfg) {
  if (n_paths < 2) throw std::invalid_argument("estimate_e: need n_paths >= 2");
  if (!(eta >= 0)) throw std::invalid_argument("estimate_e: eta must be >= 0");
  const auto run = mc_detail::resolve(cfg, shape, env.intensity(), eta, y);

  const i64 bs = cfg.block_size > 0 ? cfg.block_size : 1024;
  const i64 n_blocks = (n_paths + bs - 1) / bs;
  auto blocks = run_indexed_tasks<Accumulator>(n_blocks, cfg.workers, [&](i64 b) {
    PotentialView<D> view(env, shape);
    PathConfig<D> pc = run.path;
    Accumulator acc;
    const i64 first = b * bs, last = std::min(n_paths, first + bs);
    for (i64 i = first; i < last; ++i) {
      RngStream rng(cfg.master_seed,
                    make_stream_id(stream_tag::kPath, cfg.stream_salt, static_cast<u64>(i)));
      const FKSample s =
          walk_until_hit<D>(pc, rng, [&](const Vec<D>& x) { return eta + view(x); }, y);
      acc.add(s.hitting.hit ? std::exp(s.log_lr - s.integral) : 0.0, !s.hitting.hit);
    }
    return acc;
  });

  Accumulator total;
  for (const auto& b : blocks) total.merge(b);
  if (total.truncated == total.n)
    throw EstimatorError("estimate_e: every path truncated at t_max=" +
                         format_double(run.path.t_max) + ", estimate degenerate");

  Estimate est;
  est.mean = total.mean();
  est.std_error = total.std_error();
  est.n = total.n;
  est.truncated_fraction = total.truncated_fraction();
  auto fp = mc_detail::base_fingerprint("e", shape, env.intensity(), eta, y, cfg, run);
  fp.field("env_seed", env.master_seed()).field("n_paths", n_paths);
  est.config_fingerprint = fp.value();
  return est;
}

template <int D>
Estimate estimate_a(const Environment<D>& env, const ObstacleShape<D>& shape, double eta,
                    const Vec<D>& y, i64 n_paths, const McConfig& cfg) {
  Estimate e = estimate_e(env, shape, eta, y, n_paths, cfg);
  if (!(e.mean > 0)) throw EstimatorError("estimate_a: e-estimate is 0, a would be infinite");
  Estimate a = e;
  a.mean = -std::log(e.mean);
  a.std_error = e.std_error / e.mean;  // delta method
  a.bias_warning = e.std_error > 0.1 * e.mean;
  a.config_fingerprint = hash_combine(e.config_fingerprint, 0xa);
  return a;
}

namespace mc_detail {

// Shared backbone of the two environment-averaged estimators: per-env FK
// weight means, folded in environment order.
template <int D>
struct EnvSweep {
  std::vector<Accumulator> per_env;
  i64 total_paths = 0;
  i64 total_truncated = 0;
};

template <int D>
EnvSweep<D> sweep_environments(const ObstacleShape<D>& shape, double nu, double eta,
                               const Vec<D>& y, i64 n_envs, i64 n_paths, const McConfig& cfg,
                               const ResolvedRun<D>& run) {
  auto per_env = run_indexed_tasks<Accumulator>(n_envs, cfg.workers, [&](i64 j) {
    Environment<D> env(nu, env_seed(cfg.master_seed, cfg.stream_salt, j), run.cell_size);
    const u64 path_salt = hash_combine(cfg.stream_salt, static_cast<u64>(j) + 1);
    return fk_weights_one_env(env, shape, eta, y, n_paths, run, cfg.master_seed, path_salt);
  });
  EnvSweep<D> sweep;
  sweep.per_env = std::move(per_env);
  for (const auto& acc : sweep.per_env) {
    sweep.total_paths += acc.n;
    sweep.total_truncated += acc.truncated;
  }
  return sweep;
}

}  // namespace mc_detail

// Quenched exponent: mean over environments of a(n_dist y_dir)/n_dist.
template <int D>
Estimate estimate_quenched_alpha(const ObstacleShape<D>& shape, double nu, double eta,
                                 const Vec<D>& y_dir, double n_dist, i64 n_envs, i64 n_paths,
                                 const McConfig& cfg) {
  if (std::abs(norm<D>(y_dir) - 1.0) > 1e-9)
    throw std::invalid_argument("estimate_quenched_alpha: y_dir must be a unit vector");
  if (!(n_dist > 1)) throw std::invalid_argument("estimate_quenched_alpha: need n_dist > 1");
  if (n_envs < 2) throw std::invalid_argument("estimate_quenched_alpha: need n_envs >= 2");
  const Vec<D> y = scaled<D>(y_dir, n_dist);
  const auto run = mc_detail::resolve(cfg, shape, nu, eta, y);
  const auto sweep = mc_detail::sweep_environments(shape, nu, eta, y, n_envs, n_paths, cfg, run);

  Welford stats;
  i64 excluded = 0;
  for (const auto& acc : sweep.per_env) {
    const double m = acc.mean();
    if (m > 0)
      stats.add(-std::log(m) / n_dist);
    else
      ++excluded;
  }
  if (excluded * 100 > n_envs)
    throw EstimatorError("estimate_quenched_alpha: " + std::to_string(excluded) + " of " +
                         std::to_string(n_envs) + " environments had no surviving paths (>1%)");
  Estimate est;
  est.mean = stats.mean;
  est.std_error = stats.std_error();
  est.n = stats.n;
  est.excluded = excluded;
  est.truncated_fraction =
      sweep.total_paths > 0 ? static_cast<double>(sweep.total_truncated) / sweep.total_paths : 0;
  auto fp = mc_detail::base_fingerprint("alpha", shape, nu, eta, y, cfg, run);
  fp.field("n_dist", n_dist).field("n_envs", n_envs).field("n_paths", n_paths);
  est.config_fingerprint = fp.value();
  return est;
}

// Annealed exponent, direct route: pool the FK weights over the whole
// env x path grid, take -ln(mean)/n_dist. The standard error treats each
// environment as one cluster; per-path errors would be far too optimistic
// because weights within an environment are correlated.
template <int D>
Estimate estimate_annealed_beta_direct(const ObstacleShape<D>& shape, double nu, double eta,
                                       const Vec<D>& y_dir, double n_dist, i64 n_envs, i64 n_paths,
                                       const McConfig& cfg) {
  if (std::abs(norm<D>(y_dir) - 1.0) > 1e-9)
    throw std::invalid_argument("estimate_annealed_beta_direct: y_dir must be a unit vector");
  if (!(n_dist > 1)) throw std::invalid_argument("estimate_annealed_beta_direct: need n_dist > 1");
  if (n_envs < 2) throw std::invalid_argument("estimate_annealed_beta_direct: need n_envs >= 2");
  const Vec<D> y = scaled<D>(y_dir, n_dist);
  const auto run = mc_detail::resolve(cfg, shape, nu, eta, y);
  const auto sweep = mc_detail::sweep_environments(shape, nu, eta, y, n_envs, n_paths, cfg, run);

  Welford cluster;
  for (const auto& acc : sweep.per_env) cluster.add(acc.mean());
  const double pooled = cluster.mean;
  if (!(pooled > 0))
    throw EstimatorError("estimate_annealed_beta_direct: pooled mean is 0, beta would be infinite");

  Estimate est;
  est.mean = -std::log(pooled) / n_dist;
  est.std_error = cluster.std_error() / (pooled * n_dist);
  est.bias_warning = cluster.std_error() > 0.1 * pooled;
  est.n = sweep.total_paths;
  est.truncated_fraction = static_cast<double>(sweep.total_truncated) / sweep.total_paths;
  auto fp = mc_detail::base_fingerprint("beta_direct", shape, nu, eta, y, cfg, run);
  fp.field("n_dist", n_dist).field("n_envs", n_envs).field("n_paths", n_paths);
  est.config_fingerprint = fp.value();
  return est;
}

// Annealed exponent, sausage route: integrating the Poisson cloud out of
// E[e] leaves a single-path functional,
//
//   E e(y) = E_path[ exp(-eta H - nu S) ],
//
// so no environments are sampled at all.
template <int D>
Estimate estimate_annealed_beta_sausage(const ObstacleShape<D>& shape, double nu, double eta,
                                        const Vec<D>& y_dir, double n_dist, i64 n_paths,
                                        const McConfig& cfg) {
  if (std::abs(norm<D>(y_dir) - 1.0) > 1e-9)
    throw std::invalid_argument("estimate_annealed_beta_sausage: y_dir must be a unit vector");
  if (!(n_dist > 1)) throw std::invalid_argument("estimate_annealed_beta_sausage: need n_dist > 1");
  if (n_paths < 2) throw std::invalid_argument("estimate_annealed_beta_sausage: need n_paths >= 2");
  const Vec<D> y = scaled<D>(y_dir, n_dist);
  const auto run = mc_detail::resolve(cfg, shape, nu, eta, y);

  const i64 bs = cfg.block_size > 0 ? cfg.block_size : 1024;
  const i64 n_blocks = (n_paths + bs - 1) / bs;
  auto blocks = run_indexed_tasks<Accumulator>(n_blocks, cfg.workers, [&](i64 b) {
    Accumulator acc;
    const i64 first = b * bs, last = std::min(n_paths, first + bs);
    for (i64 i = first; i < last; ++i) {
      RngStream rng(cfg.master_seed,
                    make_stream_id(stream_tag::kPath, hash_combine(cfg.stream_salt, 0x5a), static_cast<u64>(i)));
      SausageSample<D> s = sausage_functional(run.path, rng, shape, y, cfg.sausage_pitch);
      const double w =
          s.hitting.hit ? std::exp(s.log_lr - eta * s.hitting.H - nu * s.S) : 0.0;
      acc.add(w, !s.hitting.hit);
    }
    return acc;
  });

  Accumulator total;
  for (const auto& b : blocks) total.merge(b);
  if (total.truncated == total.n)
    throw EstimatorError("estimate_annealed_beta_sausage: every path truncated");
  const double mean = total.mean();
  if (!(mean > 0))
    throw EstimatorError("estimate_annealed_beta_sausage: mean weight is 0, beta would be infinite");

  Estimate est;
  est.mean = -std::log(mean) / n_dist;
  est.std_error = total.std_error() / (mean * n_dist);
  est.bias_warning = total.std_error() > 0.1 * mean;
  est.n = total.n;
  est.truncated_fraction = total.truncated_fraction();
  auto fp = mc_detail::base_fingerprint("beta_sausage", shape, nu, eta, y, cfg, run);
  fp.field("n_dist", n_dist).field("n_paths", n_paths).field("pitch", cfg.sausage_pitch);
  est.config_fingerprint = fp.value();
  return est;
}

// Upper bound from the mean potential, sqrt(2 (eta + nu ||W||_1)) per unit
// direction: the quenched exponent never exceeds the constant-potential
// exponent at the averaged kill rate.
template <int D>
double bound_mean_potential(const ObstacleShape<D>& shape, double nu, double eta) {
  return std::sqrt(2.0 * (eta + nu * shape.l1_norm()));
}

// Coarser classical bound sqrt(2 (eta + lambda_d + ||W||_inf nu omega_d (a+2)^d)),
// a = support radius, lambda_d the unit-ball Dirichlet eigenvalue.
template <int D>
double bound_eigenvalue(const ObstacleShape<D>& shape, double nu, double eta) {
  const double a = shape.support_radius();
  const double obstacle =
      shape.linf_norm() * nu * unit_ball_volume(D) * std::pow(a + 2.0, static_cast<double>(D));
  return std::sqrt(2.0 * (eta + dirichlet_eigenvalue(D) + obstacle));
}

}  // namespace lyapmc
