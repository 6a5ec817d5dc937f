// Power-law parameter schedules (W_n, nu_n, eta_n) and the sweep that
// estimates sqrt(n) alpha_n and sqrt(n) beta_n against the limiting value
// sqrt(2 D), D = lim n (eta_n + nu_n ||W_n||_1).
//
// Schedules are restricted to exact power laws
//
//   W_n = n^{-pw} W,   nu_n = nu0 n^{-pv},   eta_n = eta0 n^{-pe},
//
// because those admit closed-form certificates for the two hypotheses that
// the scaling limit needs: sup_n ||n W_n||_inf < inf (pw >= 1) and bounded
// support (automatic, scaling never touches the support). D then reads off
// the exponents exactly instead of being estimated.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lyapmc/common.hpp"
#include "lyapmc/estimators.hpp"
#include "lyapmc/shape.hpp"

namespace lyapmc {

struct ScalingSchedule {
  double shape_exp = 1.0;      // pw
  double intensity_exp = 0.0;  // pv
  double eta_exp = 1.0;        // pe
  double eta0 = 0.0;
};

// Returns human-readable hypothesis violations; empty means admissible.
inline std::vector<std::string> schedule_violations(const ScalingSchedule& s, double nu0) {
  std::vector<std::string> v;
  if (s.shape_exp < 1.0)
    v.push_back("w_inf unbounded: ||n W_n||_inf grows like n^" + format_double(1.0 - s.shape_exp));
  if (s.eta0 > 0 && s.eta_exp < 1.0)
    v.push_back("n eta_n diverges: eta_exp " + format_double(s.eta_exp) + " < 1");
  if (nu0 > 0 && s.shape_exp + s.intensity_exp < 1.0)
    v.push_back("n nu_n ||W_n||_1 diverges: shape_exp + intensity_exp < 1");
  if (s.eta0 < 0) v.push_back("eta0 must be >= 0");
  if (nu0 < 0) v.push_back("intensity must be >= 0");
  return v;
}

template <int D>
class ScalingSequence {
 public:
  ScalingSequence(ObstacleShape<D> base, double nu0, ScalingSchedule sched, std::vector<i64> n_list)
      : base_(std::move(base)), nu0_(nu0), sched_(sched), n_list_(std::move(n_list)) {
    const auto bad = schedule_violations(sched_, nu0_);
    if (!bad.empty()) throw std::invalid_argument("scaling sequence: " + bad.front());
    if (n_list_.empty()) throw std::invalid_argument("scaling sequence: empty n list");
    for (i64 n : n_list_)
      if (n < 2) throw std::invalid_argument("scaling sequence: every n must be >= 2");
  }

  const std::vector<i64>& n_list() const { return n_list_; }
  const ObstacleShape<D>& base_shape() const { return base_; }

  // sup_n ||n W_n||_inf; the supremum sits at n = 1 once pw >= 1.
  double w_inf() const { return base_.linf_norm(); }
  // sup_n diam supp W_n, constant across the schedule.
  double xi() const { return 2.0 * base_.support_radius(); }

  ObstacleShape<D> shape_at(i64 n) const {
    return base_.scaled_by(std::pow(static_cast<double>(n), -sched_.shape_exp));
  }
  double intensity_at(i64 n) const {
    return nu0_ * std::pow(static_cast<double>(n), -sched_.intensity_exp);
  }
  double eta_at(i64 n) const {
    return sched_.eta0 * std::pow(static_cast<double>(n), -sched_.eta_exp);
  }

  // n (eta_n + nu_n ||W_n||_1), evaluated through the same shape arithmetic
  // the estimators see.
  double sequence_value(i64 n) const {
    return static_cast<double>(n) * (eta_at(n) + intensity_at(n) * shape_at(n).l1_norm());
  }

  // The same quantity from the exponents directly; the gap to target_D()
  // is the schedule's known finite-n correction.
  double sequence_value_closed_form(i64 n) const {
    const double nn = static_cast<double>(n);
    return sched_.eta0 * std::pow(nn, 1.0 - sched_.eta_exp) +
           nu0_ * base_.l1_norm() * std::pow(nn, 1.0 - sched_.shape_exp - sched_.intensity_exp);
  }

  double target_D() const {
    double d = 0;
    if (sched_.eta0 > 0 && sched_.eta_exp == 1.0) d += sched_.eta0;
    if (nu0_ > 0 && sched_.shape_exp + sched_.intensity_exp == 1.0) d += nu0_ * base_.l1_norm();
    return d;
  }

  const ScalingSchedule& schedule() const { return sched_; }
  double nu0() const { return nu0_; }

 private:
  ObstacleShape<D> base_;
  double nu0_;
  ScalingSchedule sched_;
  std::vector<i64> n_list_;
};

struct ScalingBudgets {
  i64 alpha_envs = 48;
  i64 alpha_paths = 256;
  i64 sausage_paths = 8192;
};

struct ScalingRow {
  i64 n = 0;
  double sn_alpha = 0, sn_alpha_se = 0;  // sqrt(n) alpha_n and its SE
  double sn_beta = 0, sn_beta_se = 0;    // sqrt(n) beta_n (sausage route)
  double target = 0;                     // sqrt(2 D)
  double gap = 0, gap_se = 0;            // |sn_beta - target|
  double bound_t4 = 0, bound_szn = 0;    // per-n closed-form bounds
  double alpha_truncated = 0, beta_truncated = 0;
  i64 alpha_excluded = 0;
};

template <int D>
std::vector<ScalingRow> scaling_experiment(const ScalingSequence<D>& seq, const Vec<D>& y_dir,
                                           double n_dist, const ScalingBudgets& budgets,
                                           const McConfig& cfg) {
  const double target = std::sqrt(2.0 * seq.target_D());
  std::vector<ScalingRow> rows;
  rows.reserve(seq.n_list().size());
  for (i64 n : seq.n_list()) {
    const ObstacleShape<D> shape = seq.shape_at(n);
    const double nu = seq.intensity_at(n);
    const double eta = seq.eta_at(n);
    const double sn = std::sqrt(static_cast<double>(n));

    McConfig acfg = cfg;
    acfg.stream_salt = hash_combine(cfg.stream_salt, 2 * static_cast<u64>(n));
    McConfig bcfg = cfg;
    bcfg.stream_salt = hash_combine(cfg.stream_salt, 2 * static_cast<u64>(n) + 1);

    ScalingRow row;
    row.n = n;
    row.target = target;
    row.bound_t4 = bound_mean_potential(shape, nu, eta);
    row.bound_szn = bound_eigenvalue(shape, nu, eta);

    if (budgets.alpha_envs > 0) {
      const Estimate alpha = estimate_quenched_alpha(shape, nu, eta, y_dir, n_dist,
                                                     budgets.alpha_envs, budgets.alpha_paths, acfg);
      row.sn_alpha = sn * alpha.mean;
      row.sn_alpha_se = sn * alpha.std_error;
      row.alpha_truncated = alpha.truncated_fraction;
      row.alpha_excluded = alpha.excluded;
    }
    const Estimate beta =
        estimate_annealed_beta_sausage(shape, nu, eta, y_dir, n_dist, budgets.sausage_paths, bcfg);
    row.sn_beta = sn * beta.mean;
    row.sn_beta_se = sn * beta.std_error;
    row.beta_truncated = beta.truncated_fraction;
    row.gap = std::abs(row.sn_beta - target);
    row.gap_se = row.sn_beta_se;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lyapmc
