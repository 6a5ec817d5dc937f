// End-to-end checks against exact oracles and cross-estimator identities.
// Usage: acceptance [N]   (N = 1..10; no argument runs all ten)
//
// Each criterion prints exactly one PASS/FAIL line with its measured
// numbers. Tolerances are fixed here, next to the check they guard.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lyapmc/discretize.hpp"
#include "lyapmc/estimators.hpp"
#include "lyapmc/reference.hpp"
#include "lyapmc/runner.hpp"
#include "lyapmc/scaling.hpp"

using namespace lyapmc;

namespace {

constexpr double kPi = 3.14159265358979323846;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool report(int n, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s | %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  return pass;
}

// ---------------------------------------------------------------------------
// 1. Survival probability against the closed form, d=1, empty field.
//
// The walk detects the unit ball late by about 0.58 sqrt(dt), which biases
// the raw estimate low by ~1.8% at dt = 1e-3, two orders beyond its own
// statistical error. The sqrt(dt) term cancels in the two-point Richardson
// value 2 e(dt) - e(4 dt), so the oracle comparison applies to that
// extrapolation; the leftover bias is O(dt).
bool criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ball = ObstacleShape<1>::ball_indicator(0.5, 1.0);
  Environment<1> empty(0.0, 101, 1.0);
  const Vec<1> y{3.0};
  const double oracle = std::exp(-2.0);
  const i64 n_paths = 100000;

  McConfig fine;
  fine.dt = 1e-3;
  fine.master_seed = 101;
  const Estimate e1 = estimate_e(empty, ball, 0.5, y, n_paths, fine);

  McConfig coarse = fine;
  coarse.dt = 4e-3;
  coarse.master_seed = 102;
  const Estimate e2 = estimate_e(empty, ball, 0.5, y, n_paths, coarse);

  const double extrap = 2.0 * e1.mean - e2.mean;
  const double se = std::sqrt(4.0 * e1.std_error * e1.std_error + e2.std_error * e2.std_error);
  const double dev = std::abs(extrap - oracle);
  const double rel = std::abs(extrap / oracle - 1.0);
  const double elapsed = seconds_since(t0);

  const bool pass = dev <= 3.0 * se && rel < 0.02 && elapsed < 120.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "extrapolated %.6f vs %.6f, dev %.2e (3se %.2e), rel %.2e, raw dt=1e-3 off by "
                "%+.2e, %.1fs",
                extrap, oracle, dev, 3 * se, rel, e1.mean / oracle - 1.0, elapsed);
  return report(1, pass, buf);
}

// ---------------------------------------------------------------------------
// 2. Kernel closed form in three dimensions: g = exp(-kl) / (2 pi l).
bool criterion2() {
  bool pass = true;
  std::string detail;
  for (double l : {0.5, 1.0, 5.0}) {
    const double k = 1.0;  // eta = 0.5
    const double exact = std::exp(-k * l) / (2 * kPi * l);
    const double got = green_const(3, 0.5, l);
    const double rel = std::abs(got / exact - 1.0);
    pass = pass && rel < 1e-6;
    char buf[64];
    std::snprintf(buf, sizeof buf, "l=%g rel %.2e  ", l, rel);
    detail += buf;
  }
  return report(2, pass, detail + "(tol 1e-6)");
}

// ---------------------------------------------------------------------------
// 3. Flatness of the normalized tail ratio in d=2; exactness in d=1.
bool criterion3() {
  const double r20 = green_asymptotic_ratio(2, 0.5, 20.0);
  const double r40 = green_asymptotic_ratio(2, 0.5, 40.0);
  const double drift2 = std::abs(r40 - r20) / r20;

  double worst1 = 0;
  for (double l : {1.0, 5.0, 20.0, 40.0}) {
    const double k = std::sqrt(2.0 * 0.5);
    worst1 = std::max(worst1, std::abs(green_asymptotic_ratio(1, 0.5, l) / k - 1.0));
  }
  const bool pass = drift2 < 0.01 && worst1 < 1e-12;
  char buf[160];
  std::snprintf(buf, sizeof buf, "d=2 ratio drift %.4f%% (tol 1%%), d=1 worst rel %.2e",
                100 * drift2, worst1);
  return report(3, pass, buf);
}

// ---------------------------------------------------------------------------
// 4. Mean-field upper bound on the quenched rate, with the finite-distance
// offset calibrated at zero intensity (where the answer is exact), plus the
// coarse eigenvalue bound with a wide margin.
bool criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ball = ObstacleShape<1>::ball_indicator(0.5, 1.0);
  const Vec<1> dir{1.0};
  const double n_dist = 20.0;

  McConfig cfg;
  cfg.dt = 4e-3;
  cfg.master_seed = 404;

  // calibration: nu=0 with eta = 0.5 has the same bound value 1.0 and the
  // same hitting geometry, so its measured offset from 1.0 at this dt is
  // the finite-distance correction c / n_dist
  const Estimate calib = estimate_quenched_alpha(ball, 0.0, 0.5, dir, n_dist, 2, 2000, cfg);
  const double c = (calib.mean - 1.0) * n_dist;

  const Estimate alpha = estimate_quenched_alpha(ball, 0.5, 0.0, dir, n_dist, 200, 2000, cfg);
  const double bound = bound_mean_potential(ball, 0.5, 0.0);            // = 1.0
  const double coarse = bound_eigenvalue(ball, 0.5, 0.0);               // ~ 2.7327
  const double threshold = bound + c / n_dist + 3.0 * alpha.std_error;

  const bool pass = alpha.mean <= threshold && alpha.mean <= coarse - 0.5;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "alpha %.4f +- %.4f <= %.4f (c=%.3f), coarse bound %.4f margin %.2f, %.0fs",
                alpha.mean, alpha.std_error, threshold, c, coarse, coarse - alpha.mean,
                seconds_since(t0));
  return report(4, pass, buf);
}

// ---------------------------------------------------------------------------
// Shared by criteria 5 and 10: the shrinking-bump sweep through the runner.
RunSpec scaling_spec(bool with_alpha) {
  json j;
  j["experiment"] = "scaling";
  j["dim"] = 1;
  j["intensity"] = 1.0;
  j["eta"] = 0.0;
  j["n_dist"] = 20.0;
  j["scaling"] = {{"n_list", {4, 16, 64}},
                  {"shape_exp", 1.0},
                  {"intensity_exp", 0.0},
                  {"eta_exp", 1.0},
                  {"eta0", 0.0}};
  j["budgets"] = {{"dt", 4e-3},
                  {"sausage_paths", 8192},
                  {"alpha_envs", with_alpha ? 48 : 0},
                  {"alpha_paths", 256}};
  j["seed"] = 505;
  return spec_from_json(j);
}

// 5. The rescaled annealed rate approaches sqrt(2 D) as the bump flattens:
// W_n = (1/n) 1_{[-1/2,1/2]}, nu = 1, so n nu |W_n|_1 = D = 1 at every n.
bool criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  RunSpec spec = scaling_spec(false);
  const auto dir = std::filesystem::temp_directory_path() / "lyapmc_acc5";
  std::filesystem::remove_all(dir);
  spec.out_dir = dir.string();
  const RunOutcome out = run(spec);

  const double target = std::sqrt(2.0);
  struct Row {
    i64 n;
    double v, se;
  };
  std::vector<Row> rows;
  for (const auto& r : out.rows)
    if (r.estimator == "sqrt_n_beta") rows.push_back({*r.n, *r.mean, *r.std_error});

  bool pass = rows.size() == 3;
  std::string detail;
  for (const auto& r : rows) {
    const double rel = std::abs(r.v / target - 1.0);
    if (r.n >= 16) pass = pass && rel < 0.15;
    char buf[96];
    std::snprintf(buf, sizeof buf, "n=%lld: %.4f+-%.4f (rel %.1f%%)  ",
                  static_cast<long long>(r.n), r.v, r.se, 100 * rel);
    detail += buf;
  }
  // the gap to the limit may not grow along the sequence, up to noise
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double g0 = std::abs(rows[i].v - target), g1 = std::abs(rows[i + 1].v - target);
    const double slack = 2.0 * std::sqrt(rows[i].se * rows[i].se + rows[i + 1].se * rows[i + 1].se);
    pass = pass && g1 <= g0 + slack;
  }
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed < 1800.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "target %.5f, %.0fs", target, elapsed);
  std::filesystem::remove_all(dir);
  return report(5, pass, detail + buf);
}

// ---------------------------------------------------------------------------
// 6. Averaging over environments directly or integrating them out along the
// path are two routes to the same annealed rate.
bool criterion6() {
  const auto ball = ObstacleShape<1>::ball_indicator(0.5, 1.0);
  const Vec<1> dir{1.0};
  bool pass = true;
  std::string detail;
  for (u64 seed : {11u, 22u, 33u, 44u, 55u}) {
    McConfig cfg;
    cfg.dt = 4e-3;
    cfg.master_seed = seed;
    const Estimate direct = estimate_annealed_beta_direct(ball, 0.5, 0.0, dir, 10.0, 64, 512, cfg);
    const Estimate tube = estimate_annealed_beta_sausage(ball, 0.5, 0.0, dir, 10.0, 8192, cfg);
    const double se =
        std::sqrt(direct.std_error * direct.std_error + tube.std_error * tube.std_error);
    const double dev = std::abs(direct.mean - tube.mean);
    pass = pass && dev <= 3.0 * se;
    char buf[96];
    std::snprintf(buf, sizeof buf, "seed %llu: dev %.4f (3se %.4f)  ",
                  static_cast<unsigned long long>(seed), dev, 3 * se);
    detail += buf;
  }
  return report(6, pass, detail);
}

// ---------------------------------------------------------------------------
// 7. Averaging can only help survival: annealed <= quenched on the bound
// config and on every step of the scaling sweep.
bool criterion7() {
  const auto ball = ObstacleShape<1>::ball_indicator(0.5, 1.0);
  const Vec<1> dir{1.0};
  McConfig cfg;
  cfg.dt = 4e-3;
  cfg.master_seed = 707;

  bool pass = true;
  std::string detail;
  {
    const Estimate alpha = estimate_quenched_alpha(ball, 0.5, 0.0, dir, 20.0, 64, 1000, cfg);
    const Estimate beta = estimate_annealed_beta_sausage(ball, 0.5, 0.0, dir, 20.0, 8192, cfg);
    const double se =
        std::sqrt(alpha.std_error * alpha.std_error + beta.std_error * beta.std_error);
    pass = pass && beta.mean <= alpha.mean + 3.0 * se;
    char buf[96];
    std::snprintf(buf, sizeof buf, "flat: beta %.4f vs alpha %.4f (3se %.4f)  ", beta.mean,
                  alpha.mean, 3 * se);
    detail += buf;
  }
  {
    RunSpec spec = scaling_spec(true);
    const auto dir_out = std::filesystem::temp_directory_path() / "lyapmc_acc7";
    std::filesystem::remove_all(dir_out);
    spec.out_dir = dir_out.string();
    const RunOutcome out = run(spec);
    for (i64 n : {4, 16, 64}) {
      double a = 0, ase = 0, b = 0, bse = 0;
      for (const auto& r : out.rows)
        if (r.n && *r.n == n) {
          if (r.estimator == "sqrt_n_alpha") a = *r.mean, ase = *r.std_error;
          if (r.estimator == "sqrt_n_beta") b = *r.mean, bse = *r.std_error;
        }
      const double se = std::sqrt(ase * ase + bse * bse);
      pass = pass && b <= a + 3.0 * se;
      char buf[96];
      std::snprintf(buf, sizeof buf, "n=%lld: beta %.3f vs alpha %.3f  ",
                    static_cast<long long>(n), b, a);
      detail += buf;
    }
    std::filesystem::remove_all(dir_out);
  }
  return report(7, pass, detail);
}

// ---------------------------------------------------------------------------
// 8. The drift reweighting is exact for the discrete chain, so tilted and
// untilted runs agree at any dt; the matched tilt must also be far quieter.
bool criterion8() {
  const auto ball = ObstacleShape<1>::ball_indicator(0.5, 1.0);
  Environment<1> empty(0.0, 808, 1.0);
  const Vec<1> y{3.0};
  const i64 n_paths = 100000;

  McConfig tilted;
  tilted.dt = 1e-3;
  tilted.master_seed = 808;
  const Estimate et = estimate_e(empty, ball, 0.5, y, n_paths, tilted);

  McConfig plain = tilted;
  plain.master_seed = 809;
  plain.drift = 0.0;
  const Estimate eu = estimate_e(empty, ball, 0.5, y, n_paths, plain);

  const double se = std::sqrt(et.std_error * et.std_error + eu.std_error * eu.std_error);
  const double dev = std::abs(et.mean - eu.mean);
  const double ratio = eu.std_error / et.std_error;
  const bool pass = dev <= 3.0 * se && ratio >= 3.0;
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "tilted %.6f +- %.2e, plain %.6f +- %.2e, dev %.2e (3se %.2e), se ratio %.0fx",
                et.mean, et.std_error, eu.mean, eu.std_error, dev, 3 * se, ratio);
  return report(8, pass, buf);
}

// ---------------------------------------------------------------------------
// 9. The cell-supremum table is an upper envelope of the exact field,
// everywhere, at every refinement level.
template <int D>
int domination_violations(const ObstacleShape<D>& shape, int levels_checked, int pairs, u64 salt) {
  int bad = 0;
  for (int k = 2; k <= levels_checked; k += 2) {
    const auto dshape = discretize_shape(shape, k);
    for (int i = 0; i < pairs; ++i) {
      const u64 seed = hash_combine(salt, static_cast<u64>(i) * 100 + static_cast<u64>(k));
      Environment<D> env(1.0, seed, 1.0);
      RngStream rng(seed, 1);
      Vec<D> x;
      for (int c = 0; c < D; ++c) x[c] = (rng.next_unit() - 0.5) * 8.0;
      if (discretized_potential_at(env, dshape, x) < potential_at(env, shape, x) - 1e-12) ++bad;
    }
  }
  return bad;
}

bool criterion9() {
  int bad = 0, total = 0;
  // 1000+ (seed, x) pairs spread over dimensions and shape families,
  // each checked at levels 2, 4 and 6
  bad += domination_violations(ObstacleShape<1>::radial_step({0.25, 0.5}, {3.0, 1.0}), 6, 120, 1);
  bad += domination_violations(ObstacleShape<1>::ball_indicator(0.5, 1.0), 6, 120, 2);
  bad += domination_violations(ObstacleShape<2>::ball_indicator(0.5, 2.0), 6, 120, 3);
  bad += domination_violations(ObstacleShape<2>::grid_table(0.5, 2, {1.0, 2.0, 3.0, 4.0}), 6, 120, 4);
  bad += domination_violations(ObstacleShape<3>::ball_indicator(0.5, 1.0), 6, 60, 5);
  total = (120 * 4 + 60) * 3;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d violations in %d field comparisons", bad, total);
  return report(9, bad == 0, buf);
}

// ---------------------------------------------------------------------------
// 10. Worker count is an execution detail: the scaling sweep's results.csv
// must come out byte-identical with 1 and 8 workers.
bool criterion10() {
  const auto base = std::filesystem::temp_directory_path();
  const auto d1 = base / "lyapmc_acc10_w1";
  const auto d8 = base / "lyapmc_acc10_w8";
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d8);

  RunSpec one = scaling_spec(false);
  one.out_dir = d1.string();
  one.workers = 1;
  run(one);

  RunSpec eight = scaling_spec(false);
  eight.out_dir = d8.string();
  eight.workers = 8;
  run(eight);

  const std::string r1 = slurp(d1 / "results.csv");
  const std::string r8 = slurp(d8 / "results.csv");
  const bool same_manifest = slurp(d1 / "manifest.json") == slurp(d8 / "manifest.json");
  const bool pass = !r1.empty() && r1 == r8 && same_manifest;
  char buf[96];
  std::snprintf(buf, sizeof buf, "results.csv %zu bytes, identical: %s, manifests identical: %s",
                r1.size(), r1 == r8 ? "yes" : "no", same_manifest ? "yes" : "no");
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d8);
  return report(10, pass, buf);
}

}  // namespace

int main(int argc, char** argv) {
  bool (*checks[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                        criterion6, criterion7, criterion8, criterion9, criterion10};
  try {
    if (argc > 1) {
      const int n = std::atoi(argv[1]);
      if (n < 1 || n > 10) {
        std::fprintf(stderr, "usage: acceptance [1..10]\n");
        return 2;
      }
      return checks[n - 1]() ? 0 : 1;
    }
    bool all = true;
    for (auto* c : checks) all = c() && all;
    return all ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
