// Run specification: JSON in, canonical JSON out. The canonical form is what
// gets hashed into the config fingerprint and echoed into manifest.json, so
// field emission order and formatting here are part of the reproducibility
// contract. Execution-environment fields (output directory, worker count)
// are deliberately not part of the canonical form: they change where and how
// fast results appear, never what the numbers are.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lyapmc/common.hpp"
#include "lyapmc/scaling.hpp"
#include "lyapmc/shape.hpp"

namespace lyapmc {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class ExperimentKind {
  EEstimate,
  Quenched,
  AnnealedDirect,
  AnnealedSausage,
  Scaling,
  Bounds,
  GreenTable,
};

inline const char* experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::EEstimate: return "e-estimate";
    case ExperimentKind::Quenched: return "quenched";
    case ExperimentKind::AnnealedDirect: return "annealed-direct";
    case ExperimentKind::AnnealedSausage: return "annealed-sausage";
    case ExperimentKind::Scaling: return "scaling";
    case ExperimentKind::Bounds: return "bounds";
    case ExperimentKind::GreenTable: return "green-table";
  }
  return "?";
}

inline ExperimentKind experiment_from_name(const std::string& s) {
  for (ExperimentKind k :
       {ExperimentKind::EEstimate, ExperimentKind::Quenched, ExperimentKind::AnnealedDirect,
        ExperimentKind::AnnealedSausage, ExperimentKind::Scaling, ExperimentKind::Bounds,
        ExperimentKind::GreenTable})
    if (s == experiment_name(k)) return k;
  throw ConfigError("config: key 'experiment': unknown kind '" + s + "'");
}

struct ShapeSpec {
  std::string kind = "ball-indicator";
  std::vector<double> radii{0.5};
  std::vector<double> amplitudes{1.0};
  double pitch = 0;
  i64 cells_per_dim = 0;
  std::vector<double> values;
};

struct BudgetSpec {
  i64 n_envs = 64;
  i64 n_paths = 4096;
  double dt = 1e-3;
  double t_max = 0;  // 0: auto
  double sausage_pitch = 1.0 / 64;
  i64 block_size = 1024;
  i64 alpha_envs = 48;    // scaling sweeps: quenched leg
  i64 alpha_paths = 256;
  i64 sausage_paths = 8192;
};

struct ScalingSpec {
  std::vector<i64> n_list{4, 16, 64};
  double shape_exp = 1.0;
  double intensity_exp = 0.0;
  double eta_exp = 1.0;
  double eta0 = 0.0;
};

struct GreenSpec {
  double eta = 0.5;
  double l_min = 1.0;
  double l_max = 40.0;
  i64 points = 16;
};

struct RunSpec {
  ExperimentKind experiment = ExperimentKind::Quenched;
  int dim = 1;
  ShapeSpec shape;
  double intensity = 0.5;
  double eta = 0.0;
  std::vector<double> direction{1.0};
  double n_dist = 20.0;
  BudgetSpec budgets;
  std::optional<double> drift;  // tilt magnitude override
  ScalingSpec scaling;
  GreenSpec green;
  u64 seed = 1;
  double cell_size = 0;  // 0: auto
  bool trace = false;

  // execution environment, not identity
  int workers = 1;
  std::string out_dir = "out";

  std::vector<std::string> unknown_keys;  // kept for validate() to report
};

namespace config_detail {

template <class T>
T read_key(const json& j, const char* key, const T& fallback, bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(std::string("config: key '") + key + "' is required");
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: key '") + key + "': " + e.what());
  }
}

inline void collect_unknown(const json& j, std::initializer_list<const char*> known,
                            const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) out.push_back(prefix + item.key());
  }
}

}  // namespace config_detail

inline RunSpec spec_from_json(const json& root) {
  using config_detail::collect_unknown;
  using config_detail::read_key;

  // A manifest is a valid config: unwrap its spec echo.
  const json& j = root.contains("spec") ? root.at("spec") : root;

  RunSpec s;
  s.experiment = experiment_from_name(read_key<std::string>(j, "experiment", "", true));
  s.dim = static_cast<int>(read_key<i64>(j, "dim", 1));

  if (j.contains("shape")) {
    const json& sh = j.at("shape");
    s.shape.kind = read_key<std::string>(sh, "kind", s.shape.kind);
    s.shape.radii = read_key<std::vector<double>>(sh, "radii", s.shape.radii);
    s.shape.amplitudes = read_key<std::vector<double>>(sh, "amplitudes", s.shape.amplitudes);
    s.shape.pitch = read_key<double>(sh, "pitch", s.shape.pitch);
    s.shape.cells_per_dim = read_key<i64>(sh, "cells_per_dim", s.shape.cells_per_dim);
    s.shape.values = read_key<std::vector<double>>(sh, "values", s.shape.values);
    collect_unknown(sh, {"kind", "radii", "amplitudes", "pitch", "cells_per_dim", "values"},
                    "shape.", s.unknown_keys);
  }

  s.intensity = read_key<double>(j, "intensity", s.intensity);
  s.eta = read_key<double>(j, "eta", s.eta);
  s.direction = read_key<std::vector<double>>(j, "direction", s.direction);
  s.n_dist = read_key<double>(j, "n_dist", s.n_dist);

  if (j.contains("budgets")) {
    const json& b = j.at("budgets");
    s.budgets.n_envs = read_key<i64>(b, "n_envs", s.budgets.n_envs);
    s.budgets.n_paths = read_key<i64>(b, "n_paths", s.budgets.n_paths);
    s.budgets.dt = read_key<double>(b, "dt", s.budgets.dt);
    s.budgets.t_max = read_key<double>(b, "t_max", s.budgets.t_max);
    s.budgets.sausage_pitch = read_key<double>(b, "sausage_pitch", s.budgets.sausage_pitch);
    s.budgets.block_size = read_key<i64>(b, "block_size", s.budgets.block_size);
    s.budgets.alpha_envs = read_key<i64>(b, "alpha_envs", s.budgets.alpha_envs);
    s.budgets.alpha_paths = read_key<i64>(b, "alpha_paths", s.budgets.alpha_paths);
    s.budgets.sausage_paths = read_key<i64>(b, "sausage_paths", s.budgets.sausage_paths);
    collect_unknown(b,
                    {"n_envs", "n_paths", "dt", "t_max", "sausage_pitch", "block_size",
                     "alpha_envs", "alpha_paths", "sausage_paths"},
                    "budgets.", s.unknown_keys);
  }

  if (j.contains("drift") && !j.at("drift").is_null())
    s.drift = read_key<double>(j, "drift", 0.0);

  if (j.contains("scaling")) {
    const json& sc = j.at("scaling");
    s.scaling.n_list = read_key<std::vector<i64>>(sc, "n_list", s.scaling.n_list);
    s.scaling.shape_exp = read_key<double>(sc, "shape_exp", s.scaling.shape_exp);
    s.scaling.intensity_exp = read_key<double>(sc, "intensity_exp", s.scaling.intensity_exp);
    s.scaling.eta_exp = read_key<double>(sc, "eta_exp", s.scaling.eta_exp);
    s.scaling.eta0 = read_key<double>(sc, "eta0", s.scaling.eta0);
    collect_unknown(sc, {"n_list", "shape_exp", "intensity_exp", "eta_exp", "eta0"}, "scaling.",
                    s.unknown_keys);
  }

  if (j.contains("green")) {
    const json& g = j.at("green");
    s.green.eta = read_key<double>(g, "eta", s.green.eta);
    s.green.l_min = read_key<double>(g, "l_min", s.green.l_min);
    s.green.l_max = read_key<double>(g, "l_max", s.green.l_max);
    s.green.points = read_key<i64>(g, "points", s.green.points);
    collect_unknown(g, {"eta", "l_min", "l_max", "points"}, "green.", s.unknown_keys);
  }

  s.seed = read_key<u64>(j, "seed", s.seed);
  s.cell_size = read_key<double>(j, "cell_size", s.cell_size);
  s.trace = read_key<bool>(j, "trace", s.trace);
  s.workers = static_cast<int>(read_key<i64>(j, "workers", s.workers));
  s.out_dir = read_key<std::string>(j, "out", s.out_dir);

  collect_unknown(j,
                  {"experiment", "dim", "shape", "intensity", "eta", "direction", "n_dist",
                   "budgets", "drift", "scaling", "green", "seed", "cell_size", "trace", "workers",
                   "out"},
                  "", s.unknown_keys);
  return s;
}

// Canonical form: every identity field, fixed order, defaults materialized.
inline json spec_to_json(const RunSpec& s) {
  json j;
  j["experiment"] = experiment_name(s.experiment);
  j["dim"] = s.dim;
  json sh;
  sh["kind"] = s.shape.kind;
  if (s.shape.kind == "grid-table") {
    sh["pitch"] = s.shape.pitch;
    sh["cells_per_dim"] = s.shape.cells_per_dim;
    sh["values"] = s.shape.values;
  } else {
    sh["radii"] = s.shape.radii;
    sh["amplitudes"] = s.shape.amplitudes;
  }
  j["shape"] = sh;
  j["intensity"] = s.intensity;
  j["eta"] = s.eta;
  j["direction"] = s.direction;
  j["n_dist"] = s.n_dist;
  json b;
  b["n_envs"] = s.budgets.n_envs;
  b["n_paths"] = s.budgets.n_paths;
  b["dt"] = s.budgets.dt;
  b["t_max"] = s.budgets.t_max;
  b["sausage_pitch"] = s.budgets.sausage_pitch;
  b["block_size"] = s.budgets.block_size;
  b["alpha_envs"] = s.budgets.alpha_envs;
  b["alpha_paths"] = s.budgets.alpha_paths;
  b["sausage_paths"] = s.budgets.sausage_paths;
  j["budgets"] = b;
  if (s.drift)
    j["drift"] = *s.drift;
  else
    j["drift"] = nullptr;
  json sc;
  sc["n_list"] = s.scaling.n_list;
  sc["shape_exp"] = s.scaling.shape_exp;
  sc["intensity_exp"] = s.scaling.intensity_exp;
  sc["eta_exp"] = s.scaling.eta_exp;
  sc["eta0"] = s.scaling.eta0;
  j["scaling"] = sc;
  json g;
  g["eta"] = s.green.eta;
  g["l_min"] = s.green.l_min;
  g["l_max"] = s.green.l_max;
  g["points"] = s.green.points;
  j["green"] = g;
  j["seed"] = s.seed;
  j["cell_size"] = s.cell_size;
  j["trace"] = s.trace;
  return j;
}

inline ShapeKind shape_kind_from_name(const std::string& s) {
  if (s == "ball-indicator") return ShapeKind::BallIndicator;
  if (s == "radial-step") return ShapeKind::RadialStep;
  if (s == "grid-table") return ShapeKind::GridTable;
  throw ConfigError("config: key 'shape.kind': unknown kind '" + s + "'");
}

template <int D>
ObstacleShape<D> build_shape(const ShapeSpec& s) {
  ShapeParams p;
  p.radii = s.radii;
  p.amplitudes = s.amplitudes;
  p.pitch = s.pitch;
  p.cells_per_dim = static_cast<int>(s.cells_per_dim);
  p.values = s.values;
  return make_shape<D>(shape_kind_from_name(s.kind), p);
}

// Spec-level checks, reported rather than thrown. Empty result means the
// spec is runnable as-is.
inline std::vector<std::string> validate(const RunSpec& s) {
  std::vector<std::string> v;
  for (const auto& k : s.unknown_keys) v.push_back("unknown key '" + k + "'");
  if (s.dim < 1 || s.dim > 3) v.push_back("dim must be 1, 2 or 3");
  if (s.workers < 0) v.push_back("workers must be >= 0");

  const bool needs_shape = s.experiment != ExperimentKind::GreenTable;
  if (needs_shape) {
    try {
      switch (s.dim) {
        case 1: build_shape<1>(s.shape); break;
        case 2: build_shape<2>(s.shape); break;
        case 3: build_shape<3>(s.shape); break;
        default: break;
      }
    } catch (const std::exception& e) {
      v.push_back(e.what());
    }
    if (s.intensity < 0) v.push_back("intensity must be >= 0");
    if (s.eta < 0) v.push_back("eta must be >= 0");
    if (s.cell_size < 0) v.push_back("cell_size must be >= 0 (0 = auto)");
  }

  const bool is_path_experiment =
      s.experiment == ExperimentKind::EEstimate || s.experiment == ExperimentKind::Quenched ||
      s.experiment == ExperimentKind::AnnealedDirect ||
      s.experiment == ExperimentKind::AnnealedSausage || s.experiment == ExperimentKind::Scaling;

  if (is_path_experiment) {
    if (static_cast<int>(s.direction.size()) != s.dim)
      v.push_back("direction must have dim entries");
    else {
      double n2 = 0;
      for (double c : s.direction) n2 += c * c;
      if (std::abs(std::sqrt(n2) - 1.0) > 1e-9) v.push_back("direction must be a unit vector");
    }
    if (!(s.n_dist > 1)) v.push_back("n_dist must be > 1");
    if (!(s.budgets.dt > 0)) v.push_back("budgets.dt must be > 0");
    if (s.budgets.t_max != 0 && s.budgets.t_max < s.budgets.dt)
      v.push_back("budgets.t_max must be 0 (auto) or >= dt");
    if (s.budgets.n_paths < 2) v.push_back("budgets.n_paths must be >= 2");
    if (s.budgets.block_size < 1) v.push_back("budgets.block_size must be >= 1");
    if (!(s.budgets.sausage_pitch > 0)) v.push_back("budgets.sausage_pitch must be > 0");
    if (s.drift && (!(std::isfinite(*s.drift)) || *s.drift < 0))
      v.push_back("drift must be finite and >= 0");
  }
  if (s.experiment == ExperimentKind::Quenched || s.experiment == ExperimentKind::AnnealedDirect) {
    if (s.budgets.n_envs < 2) v.push_back("budgets.n_envs must be >= 2");
  }
  if (s.experiment == ExperimentKind::Scaling) {
    ScalingSchedule sched{s.scaling.shape_exp, s.scaling.intensity_exp, s.scaling.eta_exp,
                          s.scaling.eta0};
    for (const auto& msg : schedule_violations(sched, s.intensity)) v.push_back(msg);
    if (s.scaling.n_list.empty()) v.push_back("scaling.n_list must be nonempty");
    for (i64 n : s.scaling.n_list)
      if (n < 2) v.push_back("scaling.n_list entries must be >= 2");
    if (s.budgets.alpha_envs < 0 || s.budgets.alpha_paths < 1)
      v.push_back("scaling alpha budgets must be positive (alpha_envs may be 0 to skip)");
    if (s.budgets.alpha_envs == 1) v.push_back("budgets.alpha_envs must be 0 or >= 2");
    if (s.budgets.sausage_paths < 2) v.push_back("budgets.sausage_paths must be >= 2");
  }
  if (s.experiment == ExperimentKind::GreenTable) {
    if (!(s.green.eta > 0)) v.push_back("green.eta must be > 0");
    if (!(s.green.l_min >= 1)) v.push_back("green.l_min must be >= 1");
    if (!(s.green.l_max >= s.green.l_min)) v.push_back("green.l_max must be >= l_min");
    if (s.green.points < 1) v.push_back("green.points must be >= 1");
  }
  return v;
}

}  // namespace lyapmc
