#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "cyflow/experiments.hpp"
#include "cyflow/snapshot.hpp"
#include "cyflow/variational.hpp"

namespace cyflow::app {
namespace fs = std::filesystem;

namespace {

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
      out_ << (i ? "," : "") << header[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    char buf[32];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", values[i] + 0.0);  // no -0
      out_ << (i ? "," : "") << buf;
    }
    out_ << '\n';
    if (!out_) throw Error(ErrorKind::IoError, "CSV write failed");
  }

 private:
  std::ofstream out_;
};

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

const std::vector<std::string> kSeriesHeader{
    "t", "mass", "weighted_scalar", "S_min", "S_max", "F", "dissipation", "dt"};

std::vector<double> series_values(const SeriesRow& r) {
  return {r.t, r.mass, r.weighted_scalar, r.s_min, r.s_max,
          r.energy, r.dissipation, r.dt};
}

json trajectory_json(const Trajectory& traj) {
  json j{{"status", std::string(to_string(traj.status))},
         {"steps", traj.steps},
         {"rows", traj.rows.size()},
         {"t_final", traj.final_state.t},
         {"lambda", traj.lambda},
         {"balanced", traj.balanced},
         {"max_mass_drift", traj.max_mass_drift()},
         {"max_weighted_scalar_drift", traj.max_weighted_scalar_drift()},
         {"min_scalar", traj.min_scalar()},
         {"sup_scalar", traj.max_scalar()}};
  if (traj.blowup_time) {
    j["blowup_time"] = *traj.blowup_time;
    j["divergence"] = traj.divergence_message;
  }
  if (!traj.rows.empty()) {
    j["final_s_deviation"] = traj.rows.back().s_deviation;
    j["final_energy"] = traj.rows.back().energy;
  }
  const LowerBoundReport lb = lower_bound_check(traj);
  j["lower_bound"] = {{"s0_min", lb.s0_min},
                      {"floor", lb.floor},
                      {"tol", lb.tol},
                      {"violations", lb.violations.size()},
                      {"ok", lb.ok()}};
  return j;
}

json slices_json(const Trajectory& traj, double tol) {
  if (!traj.balanced) return nullptr;
  try {
    const SliceReport rep = palais_smale_extract(traj, tol);
    return json{{"tol", tol},
                {"count", rep.slices.size()},
                {"first_t", rep.slices.front().t},
                {"last_weighted_scalar_sq", rep.slices.back().weighted_scalar_sq},
                {"last_mass", rep.slices.back().mass},
                {"min_energy", rep.min_energy},
                {"sup_scalar", rep.sup_scalar},
                {"bounded_below_observed", rep.bounded_below_observed},
                {"max_identity_gap", rep.max_identity_gap}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyReport) throw;
    return json{{"tol", tol}, {"count", 0}, {"note", e.what()}};
  }
}

/// Shared driver for flow and steady.
Trajectory flow_run(const RunConfig& cfg, const Background& bg,
                    const fs::path& dir, const CommandOptions& options,
                    std::function<bool(const FlowState&, const SeriesRow&)>
                        stop_when) {
  const ScalarField f0 = build_initial(cfg, bg);
  const FlowState state0 = FlowState::make(f0, bg);
  CsvWriter csv(dir / "series.csv", kSeriesHeader);
  fs::create_directories(dir / "snapshots");
  long row_index = 0;
  RunSinks sinks;
  sinks.on_row = [&](const SeriesRow& r) {
    csv.row(series_values(r));
    if (options.verbose) {
      std::fprintf(stderr, "t=%.6g mass=%.15g S=[%.6g, %.6g] F=%.10g\n", r.t,
                   r.mass, r.s_min, r.s_max, r.energy);
    }
  };
  const int every = cfg.output.field_snapshot_every;
  sinks.on_snapshot = [&](const FlowState& s) {
    if (every > 0 && row_index % every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "f_%06ld.cyf", row_index);
      write_snapshot(dir / "snapshots" / name, s.f);
    }
    ++row_index;
  };
  sinks.stop_when = std::move(stop_when);
  Trajectory traj = run(state0, bg, cfg.stepper, sinks);
  write_snapshot(dir / "snapshots" / "final.cyf", traj.final_state.f);
  return traj;
}

void raise_if_diverged(const Trajectory& traj) {
  if (traj.status == RunStatus::Diverged) {
    throw Error(ErrorKind::Divergence, traj.divergence_message);
  }
}

void cmd_flow(const RunConfig& cfg, const fs::path& dir,
              const CommandOptions& options) {
  const Background bg = build_background(cfg);
  const Trajectory traj = flow_run(cfg, bg, dir, options, {});
  json summary{{"command", "flow"}, {"trajectory", trajectory_json(traj)}};
  summary["slices"] = slices_json(traj, cfg.experiment.slice_tol);
  write_json(dir / "summary.json", summary);
  raise_if_diverged(traj);
}

void cmd_steady(const RunConfig& cfg, const fs::path& dir,
                const CommandOptions& options) {
  const Background bg = build_background(cfg);
  const double tol = cfg.experiment.tol;
  const Trajectory traj = flow_run(
      cfg, bg, dir, options,
      [tol](const FlowState&, const SeriesRow& r) {
        return r.s_deviation <= tol;
      });
  const bool converged = traj.status == RunStatus::Stopped;
  json summary{{"command", "steady"},
               {"tol", tol},
               {"converged", converged},
               {"trajectory", trajectory_json(traj)}};
  summary["convergence_time"] =
      converged ? json(traj.final_state.t) : json(nullptr);
  summary["slices"] = slices_json(traj, cfg.experiment.slice_tol);
  write_json(dir / "summary.json", summary);
  raise_if_diverged(traj);
  if (!converged) {
    throw Error(ErrorKind::NoConvergence,
                "||S - lambda||_inf did not reach the tolerance by t_end");
  }
}

void cmd_unbounded(const RunConfig& cfg, const fs::path& dir,
                   const CommandOptions& options) {
  const Background bg = build_background(cfg);
  const SweepTable table =
      unboundedness_sweep(cfg.experiment.r_list, bg, cfg.experiment.center);
  CsvWriter csv(dir / "sweep.csv",
                {"r", "c_r", "c_bound", "oracle_mass", "oracle_F",
                 "grid_resolved", "grid_mass", "grid_F", "spectral_F",
                 "reference", "ratio"});
  bool decreasing = true;
  bool bound_holds = true;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const SweepRow& r = table.rows[i];
    csv.row({r.r, r.c_r, r.c_bound, r.oracle_mass, r.oracle_energy,
             r.grid_resolved ? 1.0 : 0.0, r.grid_mass, r.grid_energy,
             r.spectral_energy, r.reference, r.ratio});
    if (i > 0 && !(r.oracle_energy < table.rows[i - 1].oracle_energy)) {
      decreasing = false;
    }
    bound_holds = bound_holds && r.c_r <= r.c_bound;
    if (options.verbose) {
      std::fprintf(stderr, "r=%.6g c_r=%.10g F=%.10g ratio=%.6g\n", r.r, r.c_r,
                   r.oracle_energy, r.ratio);
    }
  }
  json summary{{"command", "unbounded"},
               {"lambda", table.lambda},
               {"constant_s_base", table.constant_s_base},
               {"rows", table.rows.size()},
               {"oracle_energy_strictly_decreasing", decreasing},
               {"c_bound_holds", bound_holds}};
  if (!table.rows.empty()) {
    summary["last_r"] = table.rows.back().r;
    summary["last_energy"] = table.rows.back().oracle_energy;
    summary["last_ratio"] = table.rows.back().ratio;
  }
  write_json(dir / "summary.json", summary);
}

json hessian_json(const HessianReport& h) {
  return json{{"min_eigenvalue", h.min_eigenvalue},
              {"classification", std::string(to_string(h.classification))},
              {"iterations", h.iterations},
              {"residual", h.residual}};
}

void cmd_stability(const RunConfig& cfg, const fs::path& dir,
                   const CommandOptions& options) {
  const Background bg = build_background(cfg);
  const ScalarField f = build_initial(cfg, bg);
  EigenOptions eig;
  eig.max_iterations = cfg.experiment.max_iterations;
  eig.seed = cfg.seed;
  const HessianReport h = hessian_min_eigen(f, bg, cfg.experiment.eigen_tol, eig);
  write_snapshot(dir / "eigenvector.cyf", h.eigenvector);
  json summary{{"command", "stability"}, {"hessian", hessian_json(h)}};
  if (options.verbose) {
    std::fprintf(stderr, "min eigenvalue %.12g (%s) after %d iterations\n",
                 h.min_eigenvalue, std::string(to_string(h.classification)).c_str(),
                 h.iterations);
  }
  if (!cfg.experiment.saddle) {
    write_json(dir / "summary.json", summary);
    return;
  }

  SaddleOptions so;
  so.amplitude = cfg.experiment.amplitude;
  so.eigen_tol = cfg.experiment.eigen_tol;
  so.energy_target = cfg.experiment.energy_target;
  so.stop_at_target = cfg.experiment.stop_at_target;
  so.stepper = cfg.stepper;
  std::optional<SaddleReport> result;
  try {
    result.emplace(saddle_experiment(bg, so));
  } catch (const Error& e) {
    summary["saddle"] = error_json(e.kind(), e.what());
    write_json(dir / "summary.json", summary);
    throw;
  }
  const SaddleReport& rep = *result;
  CsvWriter csv(dir / "saddle_series.csv", kSeriesHeader);
  for (const SeriesRow& r : rep.trajectory.rows) csv.row(series_values(r));
  json saddle{{"amplitude", rep.amplitude},
              {"first_eigenvalue", rep.first_eigenvalue},
              {"hessian", hessian_json(rep.hessian)},
              {"energy_strictly_decreasing", rep.energy_strictly_decreasing},
              {"returned_to_nonnegative_energy",
               rep.returned_to_nonnegative_energy},
              {"initial_distance", rep.initial_distance},
              {"final_distance", rep.final_distance},
              {"max_step_change", rep.max_step_change},
              {"trajectory", trajectory_json(rep.trajectory)}};
  saddle["target_time"] =
      rep.target_time ? json(*rep.target_time) : json(nullptr);
  summary["saddle"] = saddle;
  write_json(dir / "summary.json", summary);
  raise_if_diverged(rep.trajectory);
}

void cmd_c0cert(const RunConfig& cfg, const fs::path& dir,
                const CommandOptions& options) {
  const Background bg = build_background(cfg);
  const ScalarField f0 = build_initial(cfg, bg);
  const C0Certificate cert = c0_certificate(f0, bg, cfg.stepper);
  write_snapshot(dir / "h.cyf", cert.h);
  write_snapshot(dir / "v0.cyf", cert.v0);
  CsvWriter csv(dir / "c0.csv", {"t", "w_norm", "bound", "reconstruction_error",
                                 "poisson_residual"});
  for (const C0Row& r : cert.rows) {
    csv.row({r.t, r.w_norm, r.bound, r.reconstruction_error,
             r.poisson_residual});
  }
  json summary{{"command", "c0cert"},
               {"K", cert.K},
               {"lambda", cert.lambda},
               {"rows", cert.rows.size()},
               {"passed", cert.passed},
               {"max_bound_ratio", cert.max_bound_ratio},
               {"max_reconstruction_error", cert.max_reconstruction_error},
               {"max_poisson_residual", cert.max_poisson_residual}};
  summary["first_violation_t"] =
      cert.first_violation ? json(cert.rows[*cert.first_violation].t)
                           : json(nullptr);
  write_json(dir / "summary.json", summary);
  if (options.verbose) {
    std::fprintf(stderr, "K=%.10g passed=%d max reconstruction %.3e\n", cert.K,
                 cert.passed ? 1 : 0, cert.max_reconstruction_error);
  }
  require_pass(cert);
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Divergence:
    case ErrorKind::StepTooSmall:
    case ErrorKind::NonFinite:
      return kExitDivergence;
    case ErrorKind::NotUnstable:
    case ErrorKind::CertificateFailed:
    case ErrorKind::EmptyReport:
    case ErrorKind::BoundViolation:
    case ErrorKind::NoConvergence:
    case ErrorKind::NotTangent:
      return kExitFailure;
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidGrid:
    case ErrorKind::GridMismatch:
    case ErrorKind::InvalidBackground:
    case ErrorKind::NotNormalized:
    case ErrorKind::NonZeroMean:
    case ErrorKind::NotBalanced:
    case ErrorKind::ResolutionTooCoarse:
    case ErrorKind::BumpDoesNotFit:
    case ErrorKind::SnapshotFormat:
    case ErrorKind::ConfigError:
    case ErrorKind::IoError:
      return kExitConfig;
  }
  return kExitFailure;
}

json error_json(ErrorKind kind, const std::string& message) {
  return json{{"error", std::string(to_string(kind))},
              {"message", message},
              {"exit_code", exit_code_for(kind)}};
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"flow", "steady", "unbounded",
                                              "stability", "c0cert"};
  return names;
}

fs::path prepare_run_dir(const RunConfig& cfg, std::string_view command,
                         const fs::path& dir) {
  const json resolved = cfg.to_json();
  const std::string text = std::string(command) + "\n" + resolved.dump();
  const fs::path run_dir =
      dir / (std::string(command) + "-" + config_hash(text));
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) {
    throw Error(ErrorKind::IoError,
                "cannot create " + run_dir.string() + ": " + ec.message());
  }
  write_json(run_dir / "config.json", resolved);
  fs::remove(run_dir / "error.json", ec);
  return run_dir;
}

void run_command(std::string_view command, const RunConfig& cfg,
                 const fs::path& run_dir, const CommandOptions& options) {
  if (command == "flow") return cmd_flow(cfg, run_dir, options);
  if (command == "steady") return cmd_steady(cfg, run_dir, options);
  if (command == "unbounded") return cmd_unbounded(cfg, run_dir, options);
  if (command == "stability") return cmd_stability(cfg, run_dir, options);
  if (command == "c0cert") return cmd_c0cert(cfg, run_dir, options);
  throw Error(ErrorKind::ConfigError,
              "unknown command '" + std::string(command) + "'");
}

}  // namespace cyflow::app
