// Experiment runner: a validated RunSpec in, artifacts on disk out.
//
//   results.csv      one schema for every experiment kind, nullable columns
//   manifest.json    canonical spec echo + fingerprint; feeding the manifest
//                    back through `run` reproduces every artifact byte-exactly
//   green_table.csv  green-table runs only
//   plot.gp          gnuplot script for table-producing runs
//   trace/           optional per-path dumps for e-estimate runs
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "lyapmc/config.hpp"
#include "lyapmc/diffusion.hpp"
#include "lyapmc/environment.hpp"
#include "lyapmc/estimate.hpp"
#include "lyapmc/estimators.hpp"
#include "lyapmc/reference.hpp"
#include "lyapmc/scaling.hpp"

namespace lyapmc {

struct ResultRow {
  std::optional<i64> n;
  std::optional<double> n_dist;
  std::string estimator;
  std::optional<double> mean;
  std::optional<double> std_error;
  std::optional<i64> samples;
  std::optional<double> truncated_fraction;
  std::optional<double> target;
  std::optional<double> bound_t4;
  std::optional<double> bound_szn;
};

struct RunOutcome {
  std::vector<ResultRow> rows;
  std::string out_dir;
  u64 fingerprint = 0;
};

namespace runner_detail {

inline std::string opt_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}
inline std::string opt_cell(const std::optional<i64>& v) {
  return v ? std::to_string(*v) : std::string();
}

inline void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "n,n_dist,estimator,mean,stderr,samples,truncated_fraction,target,bound_t4,bound_sznitman\n";
  for (const auto& r : rows) {
    f << opt_cell(r.n) << ',' << opt_cell(r.n_dist) << ',' << r.estimator << ',' << opt_cell(r.mean)
      << ',' << opt_cell(r.std_error) << ',' << opt_cell(r.samples) << ','
      << opt_cell(r.truncated_fraction) << ',' << opt_cell(r.target) << ',' << opt_cell(r.bound_t4)
      << ',' << opt_cell(r.bound_szn) << '\n';
  }
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

inline std::string fingerprint_hex(u64 fp) {
  static const char* hexd = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = hexd[fp & 0xf];
    fp >>= 4;
  }
  return s;
}

inline void write_manifest(const std::filesystem::path& path, const RunSpec& spec, u64 fp,
                           const std::vector<std::string>& outputs) {
  json m;
  m["schema"] = 1;
  m["tool"] = "lyapmc";
  m["fingerprint"] = fingerprint_hex(fp);
  m["spec"] = spec_to_json(spec);
  m["outputs"] = outputs;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << m.dump(2) << '\n';
}

template <int D>
Vec<D> direction_of(const RunSpec& spec) {
  Vec<D> d{};
  for (int i = 0; i < D; ++i) d[i] = spec.direction[static_cast<std::size_t>(i)];
  return d;
}

inline McConfig mc_config_of(const RunSpec& spec) {
  McConfig cfg;
  cfg.dt = spec.budgets.dt;
  cfg.t_max = spec.budgets.t_max;
  cfg.sausage_pitch = spec.budgets.sausage_pitch;
  cfg.cell_size = spec.cell_size;
  cfg.drift = spec.drift;
  cfg.master_seed = spec.seed;
  cfg.workers = spec.workers;
  cfg.block_size = spec.budgets.block_size;
  return cfg;
}

template <int D>
void write_traces(const std::filesystem::path& dir, const RunSpec& spec,
                  const ObstacleShape<D>& shape, const Environment<D>& env, const Vec<D>& y,
                  const McConfig& cfg) {
  std::filesystem::create_directories(dir);
  const auto run = mc_detail::resolve(cfg, shape, env.intensity(), spec.eta, y);
  const i64 count = std::min<i64>(4, spec.budgets.n_paths);
  for (i64 i = 0; i < count; ++i) {
    std::ofstream f(dir / ("path_" + std::to_string(i) + ".csv"), std::ios::binary);
    f << "step,t";
    for (int k = 1; k <= D; ++k) f << ",x" << k;
    f << ",V,integral\n";
    PotentialView<D> view(env, shape);
    RngStream rng(cfg.master_seed,
                  make_stream_id(stream_tag::kPath, cfg.stream_salt, static_cast<u64>(i)));
    i64 step = 0;
    double running = 0;
    walk_until_hit<D>(
        run.path, rng,
        [&](const Vec<D>& x) {
          const double v = view(x);
          running += (spec.eta + v) * run.path.dt;
          f << step << ',' << format_double(static_cast<double>(step) * run.path.dt);
          for (int k = 0; k < D; ++k) f << ',' << format_double(x[k]);
          f << ',' << format_double(v) << ',' << format_double(running) << '\n';
          ++step;
          return spec.eta + v;
        },
        y);
  }
}

template <int D>
RunOutcome run_impl(const RunSpec& spec) {
  namespace fs = std::filesystem;
  const fs::path out(spec.out_dir);
  fs::create_directories(out);

  RunOutcome outcome;
  outcome.out_dir = spec.out_dir;
  outcome.fingerprint = fnv1a64(spec_to_json(spec).dump());
  std::vector<std::string> outputs{"results.csv", "manifest.json"};

  const McConfig cfg = mc_config_of(spec);

  if (spec.experiment == ExperimentKind::GreenTable) {
    const GreenSpec& g = spec.green;
    std::ofstream f(out / "green_table.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write green_table.csv");
    f << "l,g,ratio,neg_ln_g_over_l\n";
    for (i64 i = 0; i < g.points; ++i) {
      const double t = g.points > 1 ? static_cast<double>(i) / static_cast<double>(g.points - 1) : 0.0;
      const double l = g.l_min * std::pow(g.l_max / g.l_min, t);
      const double lg = green_log(spec.dim, g.eta, l);
      const double ratio = green_asymptotic_ratio(spec.dim, g.eta, l);
      f << format_double(l) << ',' << format_double(std::exp(lg)) << ',' << format_double(ratio)
        << ',' << format_double(-lg / l) << '\n';
      ResultRow row;
      row.n_dist = l;
      row.estimator = "green";
      row.mean = std::exp(lg);
      row.target = std::sqrt(2.0 * g.eta);  // limit of -ln g / l
      outcome.rows.push_back(row);
    }
    std::ofstream plot(out / "plot.gp", std::ios::binary);
    plot << "set datafile separator ','\nset logscale x\nset xlabel 'l'\n"
            "plot 'green_table.csv' using 1:4 with linespoints title '-ln g / l', \\\n"
            "     'green_table.csv' using 1:3 with linespoints title 'ratio'\n";
    outputs.push_back("green_table.csv");
    outputs.push_back("plot.gp");
    write_results_csv(out / "results.csv", outcome.rows);
    write_manifest(out / "manifest.json", spec, outcome.fingerprint, outputs);
    return outcome;
  }

  const ObstacleShape<D> shape = build_shape<D>(spec.shape);
  const double bt4 = bound_mean_potential(shape, spec.intensity, spec.eta);
  const double bszn = bound_eigenvalue(shape, spec.intensity, spec.eta);

  if (spec.experiment == ExperimentKind::Bounds) {
    ResultRow row;
    row.estimator = "bounds";
    row.n_dist = spec.n_dist;
    row.bound_t4 = bt4;
    row.bound_szn = bszn;
    outcome.rows.push_back(row);
    write_results_csv(out / "results.csv", outcome.rows);
    write_manifest(out / "manifest.json", spec, outcome.fingerprint, outputs);
    return outcome;
  }

  const Vec<D> y_dir = direction_of<D>(spec);

  switch (spec.experiment) {
    case ExperimentKind::EEstimate: {
      const Vec<D> y = scaled<D>(y_dir, spec.n_dist);
      Environment<D> env(spec.intensity, spec.seed, cfg.cell_size > 0
                                                        ? cfg.cell_size
                                                        : std::max(1.0, shape.support_radius()));
      const Estimate e = estimate_e(env, shape, spec.eta, y, spec.budgets.n_paths, cfg);
      ResultRow re;
      re.n_dist = spec.n_dist;
      re.estimator = "e";
      re.mean = e.mean;
      re.std_error = e.std_error;
      re.samples = e.n;
      re.truncated_fraction = e.truncated_fraction;
      outcome.rows.push_back(re);
      if (e.mean > 0) {
        // same transform estimate_a applies, without rerunning the paths
        ResultRow ra = re;
        ra.estimator = "a";
        ra.mean = -std::log(e.mean);
        ra.std_error = e.std_error / e.mean;
        outcome.rows.push_back(ra);
      }
      if (spec.trace) {
        write_traces<D>(out / "trace", spec, shape, env, y, cfg);
        outputs.push_back("trace/");
      }
      break;
    }
    case ExperimentKind::Quenched: {
      const Estimate alpha =
          estimate_quenched_alpha(shape, spec.intensity, spec.eta, y_dir, spec.n_dist,
                                  spec.budgets.n_envs, spec.budgets.n_paths, cfg);
      ResultRow row;
      row.n_dist = spec.n_dist;
      row.estimator = "alpha";
      row.mean = alpha.mean;
      row.std_error = alpha.std_error;
      row.samples = alpha.n;
      row.truncated_fraction = alpha.truncated_fraction;
      row.bound_t4 = bt4;
      row.bound_szn = bszn;
      outcome.rows.push_back(row);
      break;
    }
    case ExperimentKind::AnnealedDirect: {
      const Estimate beta =
          estimate_annealed_beta_direct(shape, spec.intensity, spec.eta, y_dir, spec.n_dist,
                                        spec.budgets.n_envs, spec.budgets.n_paths, cfg);
      ResultRow row;
      row.n_dist = spec.n_dist;
      row.estimator = "beta_direct";
      row.mean = beta.mean;
      row.std_error = beta.std_error;
      row.samples = beta.n;
      row.truncated_fraction = beta.truncated_fraction;
      row.bound_t4 = bt4;
      row.bound_szn = bszn;
      outcome.rows.push_back(row);
      break;
    }
    case ExperimentKind::AnnealedSausage: {
      const Estimate beta = estimate_annealed_beta_sausage(
          shape, spec.intensity, spec.eta, y_dir, spec.n_dist, spec.budgets.n_paths, cfg);
      ResultRow row;
      row.n_dist = spec.n_dist;
      row.estimator = "beta_sausage";
      row.mean = beta.mean;
      row.std_error = beta.std_error;
      row.samples = beta.n;
      row.truncated_fraction = beta.truncated_fraction;
      row.bound_t4 = bt4;
      row.bound_szn = bszn;
      outcome.rows.push_back(row);
      break;
    }
    case ExperimentKind::Scaling: {
      ScalingSchedule sched{spec.scaling.shape_exp, spec.scaling.intensity_exp,
                            spec.scaling.eta_exp, spec.scaling.eta0};
      ScalingSequence<D> seq(shape, spec.intensity, sched, spec.scaling.n_list);
      ScalingBudgets budgets{spec.budgets.alpha_envs, spec.budgets.alpha_paths,
                             spec.budgets.sausage_paths};
      const auto table = scaling_experiment(seq, y_dir, spec.n_dist, budgets, cfg);
      for (const auto& r : table) {
        if (budgets.alpha_envs > 0) {
          ResultRow ra;
          ra.n = r.n;
          ra.n_dist = spec.n_dist;
          ra.estimator = "sqrt_n_alpha";
          ra.mean = r.sn_alpha;
          ra.std_error = r.sn_alpha_se;
          ra.samples = budgets.alpha_envs;
          ra.truncated_fraction = r.alpha_truncated;
          ra.target = r.target;
          ra.bound_t4 = r.bound_t4;
          ra.bound_szn = r.bound_szn;
          outcome.rows.push_back(ra);
        }
        ResultRow rb;
        rb.n = r.n;
        rb.n_dist = spec.n_dist;
        rb.estimator = "sqrt_n_beta";
        rb.mean = r.sn_beta;
        rb.std_error = r.sn_beta_se;
        rb.samples = budgets.sausage_paths;
        rb.truncated_fraction = r.beta_truncated;
        rb.target = r.target;
        rb.bound_t4 = r.bound_t4;
        rb.bound_szn = r.bound_szn;
        outcome.rows.push_back(rb);
      }
      std::ofstream plot(out / "plot.gp", std::ios::binary);
      plot << "set datafile separator ','\nset logscale x 2\nset xlabel 'n'\n"
              "plot '< grep sqrt_n_beta results.csv' using 1:4 with yerrorlines title 'sqrt(n) beta_n', \\\n"
              "     '< grep sqrt_n_alpha results.csv' using 1:4 with yerrorlines title 'sqrt(n) alpha_n'\n";
      outputs.push_back("plot.gp");
      break;
    }
    default:
      throw ConfigError("run: unhandled experiment kind");
  }

  write_results_csv(out / "results.csv", outcome.rows);
  write_manifest(out / "manifest.json", spec, outcome.fingerprint, outputs);
  return outcome;
}

}  // namespace runner_detail

inline RunOutcome run(const RunSpec& spec) {
  const auto violations = validate(spec);
  if (!violations.empty()) throw ConfigError("config invalid: " + violations.front());
  switch (spec.dim) {
    case 1: return runner_detail::run_impl<1>(spec);
    case 2: return runner_detail::run_impl<2>(spec);
    case 3: return runner_detail::run_impl<3>(spec);
  }
  throw ConfigError("config invalid: dim must be 1, 2 or 3");
}

}  // namespace lyapmc
