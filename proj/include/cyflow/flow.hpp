#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyflow/field.hpp"
#include "cyflow/geometry.hpp"
#include "cyflow/stepper.hpp"

namespace cyflow {

enum class Scheme { ExplicitRk4, SemiImplicit };

std::string_view to_string(Scheme scheme) noexcept;
Scheme scheme_from_string(std::string_view name);

struct StepperConfig {
  Scheme scheme = Scheme::ExplicitRk4;
  double dt_init = 1e-3;
  double cfl_safety = 0.5;
  bool renormalize_mass = false;
  double t_end = 1.0;
  double snapshot_every = 0.01;
  double divergence_threshold = kDefaultOverflowBound;
  /// 2/3-rule filter on the right-hand side.
  bool dealias = false;

  void validate() const;
};

/// Conformal factor at time t with its curvature and conserved integrals.
struct FlowState {
  ScalarField f;
  double t = 0.0;
  ScalarField S;
  double mass = 1.0;             // int exp(2f/n)
  double weighted_scalar = 0.0;  // int S exp(2f/n)

  static FlowState make(ScalarField f, const Background& bg, double t = 0.0,
                        double overflow_bound = kDefaultOverflowBound);
};

/// df/dt = (n/2) (lambda - S).
ScalarField rhs(const FlowState& state, const Background& bg);

/// Explicit stability rule:
/// cfl_safety * h_min^2 / (2 * 2n * max_x (n/2) exp(-2f/n)).
double cfl_dt(const ScalarField& f, double cfl_safety);

/// Step size the configured scheme would take from `f` (before clipping to
/// output times). Throws StepTooSmall below 1e-12.
double scheme_dt(const ScalarField& f, const StepperConfig& cfg);

/// Right-hand side of the flow as a one-component field system.
class FlowSystem : public FieldSystem {
 public:
  FlowSystem(const Background& bg, bool dealias);

  [[nodiscard]] std::size_t components() const override { return 1; }
  void evaluate(std::span<const ScalarField> y,
                std::span<ScalarField> dydt) override;
  double implicit_coefficient(std::span<const ScalarField> y,
                              std::size_t component) override;

  /// chern_laplacian(in) into `out` using the shared workspace.
  void chern_laplacian_into(const ScalarField& in, ScalarField& out);
  [[nodiscard]] const Background& background() const noexcept { return bg_; }

 private:
  const Background& bg_;
  bool dealias_;
  SpectralWorkspace ws_;
  ScalarField lap_;
  ScalarField tmp_;
};

/// Advances one step of the configured scheme with the scheme's own dt.
FlowState step(const FlowState& state, const Background& bg,
               const StepperConfig& cfg);
/// Advances one step with a prescribed dt.
FlowState step(const FlowState& state, const Background& bg,
               const StepperConfig& cfg, double dt);

/// One sampled row of the time series.
struct SeriesRow {
  double t = 0.0;
  double mass = 0.0;
  double weighted_scalar = 0.0;
  double s_min = 0.0;
  double s_max = 0.0;
  double energy = 0.0;       // NaN unless balanced
  double dissipation = 0.0;  // NaN unless balanced
  double dt = 0.0;
  double weighted_scalar_sq = 0.0;  // int S^2 exp(2f/n)
  double s_deviation = 0.0;         // ||S - lambda||_inf
};

SeriesRow sample_row(const FlowState& state, const Background& bg, double dt);

enum class RunStatus { Completed, Stopped, Diverged };
std::string_view to_string(RunStatus status) noexcept;

struct RunSinks {
  std::function<void(const SeriesRow&)> on_row;
  std::function<void(const FlowState&)> on_snapshot;
  /// Called after every accepted step with the new time and field.
  std::function<void(double, const ScalarField&)> on_step;
  /// Checked after every sampled row; returning true ends the run.
  std::function<bool(const FlowState&, const SeriesRow&)> stop_when;
};

struct Trajectory {
  std::vector<SeriesRow> rows;
  FlowState final_state;
  RunStatus status = RunStatus::Completed;
  std::optional<double> blowup_time;
  std::string divergence_message;
  long steps = 0;
  double lambda = 0.0;
  bool balanced = true;

  [[nodiscard]] double max_mass_drift() const;
  [[nodiscard]] double max_weighted_scalar_drift() const;
  [[nodiscard]] double min_scalar() const;
  [[nodiscard]] double max_scalar() const;
};

/// Integrates to cfg.t_end, sampling rows every cfg.snapshot_every.
/// Divergence ends the run with status Diverged and a recorded blow-up time.
Trajectory run(const FlowState& state0, const Background& bg,
               const StepperConfig& cfg, const RunSinks& sinks = {});

/// Consistency of the curvature evolution equation
///   dS/dt = (n/2) exp(-2f/n) chern_laplacian(S) + S (S - lambda)
/// measured as the sup-norm gap between a central difference of S over
/// [t, t + 2 dt_probe] and the right-hand side at the midpoint. The probe
/// states come from RK4 substeps below the explicit stability limit.
double scalar_evolution_residual(const FlowState& state, const Background& bg,
                                 double dt_probe, double cfl_safety = 0.5);

struct LowerBoundViolation {
  double t;
  double s_min;
  double bound;
};

struct LowerBoundReport {
  double s0_min = 0.0;
  double floor = 0.0;  // min{(S0)_min, 0}
  double tol = 0.0;
  std::vector<LowerBoundViolation> violations;

  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

/// Checks S_min(t) >= min{(S0)_min, 0} and S_min(t) >= (S0)_min exp(-lambda t)
/// on every recorded row, with tol = 1e-8 (1 + ||S0||_inf).
LowerBoundReport lower_bound_check(const Trajectory& trajectory);

}  // namespace cyflow
