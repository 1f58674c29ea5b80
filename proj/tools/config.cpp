#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "cyflow/error.hpp"
#include "cyflow/expression.hpp"
#include "cyflow/snapshot.hpp"

namespace cyflow::app {
namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorKind::ConfigError, what);
}

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (allowed.count(key) == 0) {
      config_error("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where,
      T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where + "." + key + " has the wrong type");
  }
}

FieldSpec parse_field(const json& v, const std::string& where,
                      const std::filesystem::path& base_dir) {
  FieldSpec spec;
  if (v.is_number()) {
    spec.constant = v.get<double>();
  } else if (v.is_string()) {
    spec.formula = v.get<std::string>();
  } else if (v.is_object()) {
    check_keys(v, where, {"snapshot"});
    const auto p = get<std::string>(v, "snapshot", where, "");
    if (p.empty()) config_error(where + ".snapshot must be a path");
    spec.snapshot = base_dir / p;
  } else {
    config_error(where + " must be a number, formula string or {\"snapshot\"}");
  }
  return spec;
}

ScalarField sample_field(const FieldSpec& spec, const GridPtr& grid) {
  if (spec.constant) return ScalarField(grid, *spec.constant);
  if (spec.formula) {
    return Expression::parse(*spec.formula, grid->real_dim()).sample(grid);
  }
  if (spec.snapshot) {
    if (!std::filesystem::exists(*spec.snapshot)) {
      throw Error(ErrorKind::IoError,
                  "snapshot not found: " + spec.snapshot->string());
    }
    return read_snapshot(*spec.snapshot, grid);
  }
  return ScalarField(grid, 0.0);
}

template <typename T>
std::vector<T> per_axis(const json& v, const std::string& where, int dim,
                        T fallback) {
  if (v.is_null()) return std::vector<T>(static_cast<std::size_t>(dim), fallback);
  try {
    if (v.is_number()) {
      return std::vector<T>(static_cast<std::size_t>(dim), v.get<T>());
    }
    auto out = v.get<std::vector<T>>();
    if (out.size() != static_cast<std::size_t>(dim)) {
      config_error(where + " needs " + std::to_string(dim) + " entries");
    }
    return out;
  } catch (const json::exception&) {
    config_error(where + " must be a number or a list of numbers");
  }
}

}  // namespace

json FieldSpec::to_json() const {
  if (constant) return *constant;
  if (formula) return *formula;
  if (snapshot) return json{{"snapshot", snapshot->string()}};
  return 0.0;
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, "config",
             {"grid", "background", "initial", "stepper", "experiment",
              "output", "seed"});
  RunConfig cfg;

  const json grid = doc.value("grid", json::object());
  check_keys(grid, "grid", {"complex_dim", "periods", "resolution"});
  cfg.complex_dim = get<int>(grid, "complex_dim", "grid", 1);
  if (cfg.complex_dim < 1) config_error("grid.complex_dim must be >= 1");
  const int dim = 2 * cfg.complex_dim;
  cfg.periods = per_axis<double>(grid.value("periods", json()), "grid.periods",
                                 dim, 1.0);
  if (!grid.contains("resolution")) config_error("grid.resolution is required");
  cfg.resolution =
      per_axis<int>(grid.at("resolution"), "grid.resolution", dim, 0);
  for (double l : cfg.periods) {
    if (!(l > 0.0)) config_error("grid.periods must be positive");
  }
  for (int r : cfg.resolution) {
    if (r <= 0) config_error("grid.resolution must be positive");
  }

  const json bg = doc.value("background", json::object());
  check_keys(bg, "background", {"s_base", "torsion"});
  if (!bg.contains("s_base")) config_error("background.s_base is required");
  cfg.s_base = parse_field(bg.at("s_base"), "background.s_base", base_dir);
  if (bg.contains("torsion")) {
    const json& t = bg.at("torsion");
    if (!t.is_array() || t.size() != static_cast<std::size_t>(dim)) {
      config_error("background.torsion needs " + std::to_string(dim) +
                   " components");
    }
    for (std::size_t a = 0; a < t.size(); ++a) {
      cfg.torsion.push_back(parse_field(
          t[a], "background.torsion[" + std::to_string(a) + "]", base_dir));
    }
  }

  const json init = doc.value("initial", json::object());
  check_keys(init, "initial",
             {"kind", "formula", "path", "mode", "amplitude", "normalize"});
  cfg.initial.kind = get<std::string>(init, "kind", "initial", "zero");
  cfg.initial.formula = get<std::string>(init, "formula", "initial", "");
  const auto path = get<std::string>(init, "path", "initial", "");
  if (!path.empty()) cfg.initial.path = base_dir / path;
  cfg.initial.mode = get<std::vector<int>>(init, "mode", "initial", {});
  cfg.initial.amplitude = get<double>(init, "amplitude", "initial", 0.0);
  cfg.initial.normalize = get<bool>(init, "normalize", "initial", true);
  const std::set<std::string> kinds{"zero", "canonical", "snapshot", "formula",
                                    "mode"};
  if (kinds.count(cfg.initial.kind) == 0) {
    config_error("initial.kind '" + cfg.initial.kind + "' is not one of "
                 "zero, canonical, snapshot, formula, mode");
  }
  if (cfg.initial.kind == "formula" && cfg.initial.formula.empty()) {
    config_error("initial.formula is required for kind 'formula'");
  }
  if (cfg.initial.kind == "snapshot" && cfg.initial.path.empty()) {
    config_error("initial.path is required for kind 'snapshot'");
  }
  if (cfg.initial.kind == "mode" &&
      cfg.initial.mode.size() != static_cast<std::size_t>(dim)) {
    config_error("initial.mode needs " + std::to_string(dim) + " integers");
  }

  const json st = doc.value("stepper", json::object());
  check_keys(st, "stepper",
             {"scheme", "dt_init", "cfl_safety", "renormalize_mass", "t_end",
              "snapshot_every", "divergence_threshold", "dealias"});
  StepperConfig& sc = cfg.stepper;
  sc.scheme = scheme_from_string(
      get<std::string>(st, "scheme", "stepper", std::string(to_string(sc.scheme))));
  sc.dt_init = get<double>(st, "dt_init", "stepper", sc.dt_init);
  sc.cfl_safety = get<double>(st, "cfl_safety", "stepper", sc.cfl_safety);
  sc.renormalize_mass =
      get<bool>(st, "renormalize_mass", "stepper", sc.renormalize_mass);
  sc.t_end = get<double>(st, "t_end", "stepper", sc.t_end);
  sc.snapshot_every =
      get<double>(st, "snapshot_every", "stepper", sc.snapshot_every);
  sc.divergence_threshold = get<double>(st, "divergence_threshold", "stepper",
                                        sc.divergence_threshold);
  sc.dealias = get<bool>(st, "dealias", "stepper", sc.dealias);
  sc.validate();

  const json ex = doc.value("experiment", json::object());
  check_keys(ex, "experiment",
             {"r_list", "center", "amplitude", "eigen_tol", "max_iterations",
              "energy_target", "stop_at_target", "saddle", "tol",
              "slice_tol"});
  ExperimentSpec& e = cfg.experiment;
  e.r_list = get<std::vector<double>>(ex, "r_list", "experiment", {});
  if (e.r_list.empty()) {
    for (int k = 3; k <= 10; ++k) e.r_list.push_back(std::ldexp(1.0, -k));
  }
  if (ex.contains("center")) {
    e.center = per_axis<double>(ex.at("center"), "experiment.center", dim, 0.0);
  }
  e.amplitude = get<double>(ex, "amplitude", "experiment", e.amplitude);
  e.eigen_tol = get<double>(ex, "eigen_tol", "experiment", e.eigen_tol);
  e.max_iterations =
      get<int>(ex, "max_iterations", "experiment", e.max_iterations);
  e.energy_target =
      get<double>(ex, "energy_target", "experiment", e.energy_target);
  e.stop_at_target =
      get<bool>(ex, "stop_at_target", "experiment", e.stop_at_target);
  e.saddle = get<bool>(ex, "saddle", "experiment", e.saddle);
  e.tol = get<double>(ex, "tol", "experiment", e.tol);
  e.slice_tol = get<double>(ex, "slice_tol", "experiment", e.slice_tol);
  if (!(e.tol > 0.0) || !(e.slice_tol > 0.0) || !(e.eigen_tol > 0.0)) {
    config_error("experiment tolerances must be positive");
  }

  const json out = doc.value("output", json::object());
  check_keys(out, "output", {"dir", "field_snapshot_every"});
  cfg.output.dir = get<std::string>(out, "dir", "output", "runs");
  cfg.output.field_snapshot_every =
      get<int>(out, "field_snapshot_every", "output", 0);
  if (cfg.output.field_snapshot_every < 0) {
    config_error("output.field_snapshot_every must be >= 0");
  }

  cfg.seed = get<std::uint64_t>(doc, "seed", "config", 1);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc, path.parent_path());
}

json RunConfig::to_json() const {
  json torsion_json = json::array();
  for (const auto& t : torsion) torsion_json.push_back(t.to_json());
  json bg{{"s_base", s_base.to_json()}};
  if (!torsion.empty()) bg["torsion"] = torsion_json;
  json exp{{"r_list", experiment.r_list},
           {"amplitude", experiment.amplitude},
           {"eigen_tol", experiment.eigen_tol},
           {"max_iterations", experiment.max_iterations},
           {"energy_target", experiment.energy_target},
           {"stop_at_target", experiment.stop_at_target},
           {"saddle", experiment.saddle},
           {"tol", experiment.tol},
           {"slice_tol", experiment.slice_tol}};
  if (experiment.center) exp["center"] = *experiment.center;
  return json{
      {"grid",
       {{"complex_dim", complex_dim},
        {"periods", periods},
        {"resolution", resolution}}},
      {"background", bg},
      {"initial",
       {{"kind", initial.kind},
        {"formula", initial.formula},
        {"path", initial.path.string()},
        {"mode", initial.mode},
        {"amplitude", initial.amplitude},
        {"normalize", initial.normalize}}},
      {"stepper",
       {{"scheme", std::string(cyflow::to_string(stepper.scheme))},
        {"dt_init", stepper.dt_init},
        {"cfl_safety", stepper.cfl_safety},
        {"renormalize_mass", stepper.renormalize_mass},
        {"t_end", stepper.t_end},
        {"snapshot_every", stepper.snapshot_every},
        {"divergence_threshold", stepper.divergence_threshold},
        {"dealias", stepper.dealias}}},
      {"experiment", exp},
      {"output",
       {{"dir", output.dir.string()},
        {"field_snapshot_every", output.field_snapshot_every}}},
      {"seed", seed}};
}

GridPtr build_grid(const RunConfig& cfg) {
  return make_grid(cfg.complex_dim, cfg.periods, cfg.resolution);
}

Background build_background(const RunConfig& cfg) {
  const GridPtr grid = build_grid(cfg);
  ScalarField s = sample_field(cfg.s_base, grid);
  if (cfg.torsion.empty()) return Background(std::move(s));
  CovectorField theta{grid, {}};
  for (const auto& t : cfg.torsion) {
    theta.components.push_back(sample_field(t, grid));
  }
  return Background(std::move(s), std::move(theta));
}

ScalarField build_initial(const RunConfig& cfg, const Background& bg) {
  const GridPtr grid = bg.grid_ptr();
  const InitialSpec& in = cfg.initial;
  ScalarField f(grid, 0.0);
  if (in.kind == "canonical") return canonical_initial(bg);
  if (in.kind == "snapshot") {
    FieldSpec spec;
    spec.snapshot = in.path;
    f = sample_field(spec, grid);
  } else if (in.kind == "formula") {
    f = Expression::parse(in.formula, grid->real_dim()).sample(grid);
  } else if (in.kind == "mode") {
    const auto periods = grid->periods();
    f = ScalarField::from_function(grid, [&](std::span<const double> x) {
      double phase = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) {
        phase += 2.0 * std::numbers::pi * in.mode[a] * x[a] / periods[a];
      }
      return in.amplitude * std::cos(phase);
    });
  }
  return in.normalize ? normalize_conformal(f) : f;
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cyflow::app
