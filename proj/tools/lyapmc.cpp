// Command line front end.
//
// Exit codes: 0 success, 2 bad config or validation failure,
// 3 degenerate estimate (all paths truncated, zero mean), 4 I/O trouble.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "lyapmc/runner.hpp"

namespace {

lyapmc::RunSpec load_spec(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw lyapmc::ConfigError("cannot open config file '" + path + "'");
  lyapmc::json j;
  try {
    j = lyapmc::json::parse(f);
  } catch (const std::exception& e) {
    throw lyapmc::ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return lyapmc::spec_from_json(j);
}

int report_violations(const lyapmc::RunSpec& spec) {
  const auto v = lyapmc::validate(spec);
  for (const auto& msg : v) std::cerr << "invalid: " << msg << '\n';
  return v.empty() ? 0 : 2;
}

template <int D>
void print_bounds_impl(const lyapmc::RunSpec& spec) {
  const auto shape = lyapmc::build_shape<D>(spec.shape);
  std::cout << "bound_t4 " << lyapmc::format_double(lyapmc::bound_mean_potential(
                                  shape, spec.intensity, spec.eta))
            << '\n'
            << "bound_sznitman "
            << lyapmc::format_double(lyapmc::bound_eigenvalue(shape, spec.intensity, spec.eta))
            << '\n';
}

void print_bounds(const lyapmc::RunSpec& spec) {
  switch (spec.dim) {
    case 1: print_bounds_impl<1>(spec); break;
    case 2: print_bounds_impl<2>(spec); break;
    case 3: print_bounds_impl<3>(spec); break;
    default: throw lyapmc::ConfigError("dim must be 1, 2 or 3");
  }
}

void print_rows(const lyapmc::RunOutcome& outcome) {
  for (const auto& r : outcome.rows) {
    std::cout << r.estimator;
    if (r.n) std::cout << " n=" << *r.n;
    if (r.mean) std::cout << " mean=" << lyapmc::format_double(*r.mean);
    if (r.std_error) std::cout << " stderr=" << lyapmc::format_double(*r.std_error);
    if (r.target) std::cout << " target=" << lyapmc::format_double(*r.target);
    std::cout << '\n';
  }
  std::cout << "wrote " << outcome.out_dir << "/results.csv and manifest.json\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo estimates of Lyapunov exponents for Brownian motion "
               "among Poissonian obstacles"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  lyapmc::u64 seed = 0;
  int workers = -1;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", config_path, "JSON run spec (or a manifest.json)");
    if (config_required) c->required();
    sub->add_option("--seed", seed, "override master seed");
    sub->add_option("--workers", workers, "override worker thread count (0 = all cores)");
    sub->add_option("--out", out_dir, "override output directory");
  };

  auto* cmd_run = app.add_subcommand("run", "run the experiment described by a config");
  add_common(cmd_run, true);

  auto* cmd_validate = app.add_subcommand("validate", "check a config and report problems");
  cmd_validate->add_option("--config", config_path, "JSON run spec to check")->required();

  auto* cmd_green = app.add_subcommand(
      "green-table", "tabulate the constant-potential Green function against its asymptotics");
  add_common(cmd_green, false);
  int g_dim = 0;
  double g_eta = 0, g_lmin = 0, g_lmax = 0;
  lyapmc::i64 g_points = 0;
  cmd_green->add_option("--dim", g_dim, "dimension (1, 2 or 3)");
  cmd_green->add_option("--eta", g_eta, "constant potential level, > 0");
  cmd_green->add_option("--l-min", g_lmin, "smallest distance, >= 1");
  cmd_green->add_option("--l-max", g_lmax, "largest distance");
  cmd_green->add_option("--points", g_points, "rows in the table");

  auto* cmd_bounds = app.add_subcommand(
      "bounds", "print closed-form upper bounds for the quenched exponent per unit distance");
  add_common(cmd_bounds, false);
  int b_dim = 0;
  double b_nu = -1, b_eta = -1, b_radius = 0, b_amp = -1;
  cmd_bounds->add_option("--dim", b_dim, "dimension (1, 2 or 3)");
  cmd_bounds->add_option("--nu", b_nu, "obstacle intensity");
  cmd_bounds->add_option("--eta", b_eta, "constant killing level");
  cmd_bounds->add_option("--radius", b_radius, "ball obstacle radius");
  cmd_bounds->add_option("--amplitude", b_amp, "ball obstacle height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    lyapmc::RunSpec spec;
    if (!config_path.empty()) {
      spec = load_spec(config_path);
    }

    if (cmd_validate->parsed()) {
      const int rc = report_violations(spec);
      if (rc == 0) std::cout << "ok\n";
      return rc;
    }

    if (cmd_green->parsed()) {
      if (config_path.empty()) spec.experiment = lyapmc::ExperimentKind::GreenTable;
      if (g_dim > 0) spec.dim = g_dim;
      if (cmd_green->count("--eta")) spec.green.eta = g_eta;
      if (cmd_green->count("--l-min")) spec.green.l_min = g_lmin;
      if (cmd_green->count("--l-max")) spec.green.l_max = g_lmax;
      if (cmd_green->count("--points")) spec.green.points = g_points;
    }

    if (cmd_bounds->parsed()) {
      if (config_path.empty()) spec.experiment = lyapmc::ExperimentKind::Bounds;
      if (b_dim > 0) spec.dim = b_dim;
      if (b_nu >= 0) spec.intensity = b_nu;
      if (b_eta >= 0) spec.eta = b_eta;
      if (b_radius > 0) {
        spec.shape.kind = "ball-indicator";
        spec.shape.radii = {b_radius};
        spec.shape.amplitudes = {b_amp >= 0 ? b_amp : 1.0};
      } else if (b_amp >= 0) {
        spec.shape.amplitudes = {b_amp};
      }
    }

    if (cmd_run->count("--seed") || cmd_green->count("--seed") || cmd_bounds->count("--seed"))
      spec.seed = seed;
    if (workers >= 0) spec.workers = workers;
    if (!out_dir.empty()) spec.out_dir = out_dir;

    if (cmd_bounds->parsed()) {
      const int rc = report_violations(spec);
      if (rc != 0) return rc;
      print_bounds(spec);
      if (!out_dir.empty()) {
        auto bspec = spec;
        bspec.experiment = lyapmc::ExperimentKind::Bounds;
        lyapmc::run(bspec);
        std::cout << "wrote " << bspec.out_dir << "/results.csv and manifest.json\n";
      }
      return 0;
    }

    const int rc = report_violations(spec);
    if (rc != 0) return rc;
    const auto outcome = lyapmc::run(spec);
    print_rows(outcome);
    return 0;
  } catch (const lyapmc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const lyapmc::EstimatorError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
