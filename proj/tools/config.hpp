#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyflow/flow.hpp"
#include "cyflow/geometry.hpp"

namespace cyflow::app {

using nlohmann::json;

/// Scalar data given as a formula, a constant or a snapshot file.
struct FieldSpec {
  std::optional<std::string> formula;
  std::optional<double> constant;
  std::optional<std::filesystem::path> snapshot;

  [[nodiscard]] json to_json() const;
};

struct InitialSpec {
  /// zero | canonical | snapshot | formula | mode
  std::string kind = "zero";
  std::string formula;
  std::filesystem::path path;
  std::vector<int> mode;
  double amplitude = 0.0;
  bool normalize = true;
};

struct ExperimentSpec {
  std::vector<double> r_list;
  std::optional<std::vector<double>> center;
  double amplitude = 1e-3;
  double eigen_tol = 1e-10;
  int max_iterations = 2000;
  double energy_target = -0.1;
  bool stop_at_target = true;
  bool saddle = false;
  double tol = 1e-6;        // steady-state threshold on ||S - lambda||_inf
  double slice_tol = 1e-8;  // |dissipation| threshold for slices
};

struct OutputSpec {
  std::filesystem::path dir = "runs";
  /// Write a field snapshot every k sampled rows; 0 keeps only the final one.
  int field_snapshot_every = 0;
};

struct RunConfig {
  int complex_dim = 1;
  std::vector<double> periods;
  std::vector<int> resolution;
  FieldSpec s_base;
  std::vector<FieldSpec> torsion;  // empty: balanced
  InitialSpec initial;
  StepperConfig stepper;
  ExperimentSpec experiment;
  OutputSpec output;
  std::uint64_t seed = 1;

  /// Fully resolved configuration (defaults filled in); rerunning it
  /// reproduces the run.
  [[nodiscard]] json to_json() const;
};

/// Relative snapshot paths resolve against `base_dir`.
RunConfig parse_config(const json& doc,
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

GridPtr build_grid(const RunConfig& cfg);
Background build_background(const RunConfig& cfg);
ScalarField build_initial(const RunConfig& cfg, const Background& bg);

/// Stable 64-bit FNV-1a digest, printed as 16 hex digits.
std::string config_hash(const std::string& text);

}  // namespace cyflow::app
