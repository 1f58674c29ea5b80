#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cyflow/field.hpp"
#include "cyflow/flow.hpp"
#include "cyflow/geometry.hpp"
#include "cyflow/variational.hpp"

namespace cyflow {

/// Volume of the Euclidean unit ball in real dimension 2n: pi^n / n!.
double unit_ball_volume(int complex_dim);

/// Radial Lipschitz profile: c_r on B_r, linear in |x| on B_2r \ B_r,
/// log r outside B_2r.
struct BumpProfile {
  double r = 0.0;
  double c_r = 0.0;
  std::vector<double> center;
  int n = 1;
  double outer_value = 0.0;  // log r

  [[nodiscard]] double value_at(double rho) const noexcept;
  /// Magnitude of the gradient on the annulus, (c_r - log r) / r.
  [[nodiscard]] double annulus_slope() const noexcept;
  /// -n^2 log r - (n/2) log C, C the unit-ball volume.
  [[nodiscard]] double c_bound() const;
};

/// Integrals of a profile on a torus of the given periods, computed by 1D
/// radial quadrature (exact geometry, no grid).
struct RadialOracle {
  double mass = 0.0;
  double dirichlet = 0.0;  // 1/2 int |df|^2
  double mean = 0.0;       // int f
};

RadialOracle radial_integrals(const BumpProfile& profile,
                              const std::vector<double>& periods);

/// Solves for c_r so that the radial mass is one (|mass - 1| <= 1e-10).
/// Throws BumpDoesNotFit unless 0 < 2r < min(L)/2.
BumpProfile solve_bump(double r, std::vector<double> center, int complex_dim,
                       const std::vector<double>& periods);

/// Periodic Euclidean distance from grid point `x` to `center`.
double periodic_distance(std::span<const double> x,
                         const std::vector<double>& center,
                         const std::vector<double>& periods);

struct BumpField {
  BumpProfile profile;
  ScalarField field;
  double grid_mass = 0.0;
};

/// solve_bump plus the profile sampled on the background's grid.
/// Throws ResolutionTooCoarse if r spans fewer than 4 cells.
BumpField bump_family(double r, const std::vector<double>& center,
                      const Background& bg);

/// Grid quadrature of F for a sampled bump. The kink makes spectral
/// gradients ring, so |df|^2 uses the exact annulus slope at grid points
/// (boundary points weighted 1/2) and int s_base f uses the grid sum.
double bump_energy_grid(const BumpField& bump, const Background& bg);

/// Nearest grid point to the middle of the fundamental domain.
std::vector<double> default_center(const TorusGrid& grid);

struct SweepRow {
  double r = 0.0;
  double c_r = 0.0;
  double c_bound = 0.0;
  double oracle_mass = 0.0;
  double oracle_energy = 0.0;  // NaN unless s_base is constant
  bool grid_resolved = false;
  double grid_mass = 0.0;      // NaN unless grid_resolved
  double grid_energy = 0.0;    // NaN unless grid_resolved
  double spectral_energy = 0.0;  // energy() on the sampled field
  double reference = 0.0;      // (lambda/2) log r
  double ratio = 0.0;          // oracle_energy / reference
};

struct SweepTable {
  double lambda = 0.0;
  bool constant_s_base = false;
  std::vector<SweepRow> rows;
};

/// Requires a balanced background with lambda > 0 and n >= 2.
SweepTable unboundedness_sweep(const std::vector<double>& r_list,
                               const Background& bg,
                               std::optional<std::vector<double>> center = {});

struct SaddleOptions {
  double amplitude = 1e-3;
  double eigen_tol = 1e-10;
  double energy_target = -0.1;
  /// End the run at the first row with F < energy_target. Generic unstable
  /// directions concentrate afterwards and the explicit step collapses.
  bool stop_at_target = true;
  StepperConfig stepper{Scheme::ExplicitRk4, 1e-3, 0.5, false, 1.0, 0.01,
                        kDefaultOverflowBound, false};
};

struct SaddleReport {
  HessianReport hessian;
  double first_eigenvalue = 0.0;  // lambda_1 of -Laplacian
  double amplitude = 0.0;
  Trajectory trajectory;
  bool energy_strictly_decreasing = false;
  std::optional<double> target_time{};  // first row with F < energy_target
  bool returned_to_nonnegative_energy = false;
  double initial_distance = 0.0;  // ||f||_inf at t0
  double final_distance = 0.0;
  double max_step_change = 0.0;  // max ||f_{k+1} - f_k||_inf
};

/// Flow started near f = 0 along the unstable Hessian direction.
/// Requires a balanced background with constant s_base = lambda and
/// 2 lambda / n > lambda_1; throws NotUnstable otherwise.
SaddleReport saddle_experiment(const Background& bg,
                               const SaddleOptions& options = {});

struct C0Row {
  double t = 0.0;
  double w_norm = 0.0;
  double bound = 0.0;  // K exp(lambda t)
  double reconstruction_error = 0.0;
  double poisson_residual = 0.0;
};

struct C0Certificate {
  ScalarField h;
  ScalarField v0;
  double K = 0.0;
  double lambda = 0.0;
  std::vector<C0Row> rows{};
  bool passed = false;
  std::optional<std::size_t> first_violation{};
  double max_reconstruction_error = 0.0;
  double max_poisson_residual = 0.0;
  double max_bound_ratio = 0.0;  // max ||w|| / (K exp(lambda t))
};

inline constexpr double kCertificateBoundSlack = 1e-6;
inline constexpr double kCertificateReconstructionTol = 1e-5;

/// Co-evolves (f, w, v) with dw/dt = (n/2) exp(-2f/n) chern_laplacian(w)
/// + lambda w and dv/dt = w, from w(0) = f0 - h + lambda v0.
/// Divergence of f propagates as an Error.
C0Certificate c0_certificate(const ScalarField& f0, const Background& bg,
                             const StepperConfig& cfg);

/// Throws CertificateFailed naming the first violating row.
void require_pass(const C0Certificate& certificate);

struct Slice {
  double t = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double mass = 0.0;
  double weighted_scalar_sq = 0.0;
  double s_min = 0.0;
  double s_max = 0.0;
};

struct SliceReport {
  std::vector<Slice> slices;
  double tol = 0.0;
  double lambda = 0.0;
  double min_energy = 0.0;
  double sup_scalar = 0.0;
  /// Run completed, F finite throughout and flat at the end
  /// (|dissipation| <= tol on the last row).
  bool bounded_below_observed = false;
  /// max over all rows of |int S^2 exp(2f/n) - (lambda^2 - dissipation)|.
  double max_identity_gap = 0.0;
};

/// Rows with |dissipation| <= tol. Throws EmptyReport if there are none and
/// NotBalanced for runs without an energy.
SliceReport palais_smale_extract(const Trajectory& trajectory, double tol);

}  // namespace cyflow
