#pragma once

#include "cyflow/field.hpp"

namespace cyflow {

/// Default bound on max|2f/n| beyond which exp(2f/n) is treated as blow-up.
inline constexpr double kDefaultOverflowBound = 500.0;

/// Fixed Gauduchon background on the flat torus: base Chern scalar
/// curvature, torsion 1-form and total scalar curvature lambda.
///
/// The torsion must be divergence-free so that the Chern Laplacian
/// integrates to zero; this is checked on construction.
class Background {
 public:
  Background(ScalarField s_base, CovectorField torsion);

  /// Balanced background (zero torsion).
  explicit Background(ScalarField s_base);

  /// Balanced background with s_base identically `lambda`.
  static Background constant(const GridPtr& grid, double lambda);

  [[nodiscard]] const TorusGrid& grid() const noexcept { return s_base_.grid(); }
  [[nodiscard]] const GridPtr& grid_ptr() const noexcept {
    return s_base_.grid_ptr();
  }
  [[nodiscard]] int complex_dim() const noexcept { return grid().complex_dim(); }
  [[nodiscard]] const ScalarField& s_base() const noexcept { return s_base_; }
  [[nodiscard]] const CovectorField& torsion() const noexcept {
    return torsion_;
  }
  [[nodiscard]] double lambda_total() const noexcept { return lambda_; }
  [[nodiscard]] bool balanced() const noexcept { return balanced_; }

 private:
  void validate() const;

  ScalarField s_base_;
  CovectorField torsion_;
  double lambda_ = 0.0;
  bool balanced_ = true;
};

/// Laplacian minus the torsion drift (df, theta).
ScalarField chern_laplacian(const ScalarField& f, const Background& bg);

/// Chern scalar curvature of exp(2f/n) omega:
/// exp(-2f/n) (s_base - chern_laplacian(f)).
/// Throws Divergence when max|2f/n| exceeds `overflow_bound`.
ScalarField chern_scalar(const ScalarField& f, const Background& bg,
                         double overflow_bound = kDefaultOverflowBound);

double total_scalar(const Background& bg);

/// Integral of exp(2f/n).
double conformal_mass(const ScalarField& f);

/// Shifts f by a constant so that the integral of exp(2f/n) is one.
ScalarField normalize_conformal(const ScalarField& f,
                                double overflow_bound = kDefaultOverflowBound);

/// Mean-zero u with ||chern_laplacian(u) - rhs||_inf <= tol.
/// Throws NonZeroMean if rhs is not (numerically) mean-zero and
/// NoConvergence if the torsion iteration stalls.
ScalarField solve_poisson(const ScalarField& rhs, const Background& bg,
                          double tol, int max_iterations = 500);

/// Normalized h with chern_laplacian(h) = s_base - lambda.
ScalarField canonical_initial(const Background& bg);

void check_overflow(const ScalarField& f,
                    double overflow_bound = kDefaultOverflowBound);

}  // namespace cyflow
