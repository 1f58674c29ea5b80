#pragma once

#include <cstdint>
#include <string_view>

#include "cyflow/field.hpp"
#include "cyflow/geometry.hpp"

namespace cyflow {

/// Threshold separating saddle / local-min-candidate from degenerate.
inline constexpr double kDegenerateTol = 1e-8;
/// Bound on the weighted mean of a tangent direction.
inline constexpr double kTangentTol = 1e-10;

enum class Classification { LocalMinCandidate, Saddle, Degenerate };

std::string_view to_string(Classification c) noexcept;
Classification classify(double min_eigenvalue) noexcept;

/// F(f) = 1/2 int |df|^2 + int s_base f. Balanced backgrounds only.
double energy(const ScalarField& f, const Background& bg);

/// -int (S - lambda)^2 exp(2f/n). Along the flow dF/dt is n/2 times this.
double dissipation(const ScalarField& f, const Background& bg);

/// F(f) - (n lambda / 2) (int exp(2f/n) - 1).
double augmented_energy(const ScalarField& f, const Background& bg);

/// Constrained Hessian int (du, dv) - (2 lambda / n) int exp(2f/n) u v
/// for u, v tangent at f.
double second_variation(const ScalarField& f, const ScalarField& u,
                        const ScalarField& v, const Background& bg);

/// Weighted mean int exp(2f/n) u; zero for tangent directions.
double tangent_defect(const ScalarField& f, const ScalarField& u);

/// Removes the exp(2f/n) component of u (L2-orthogonal projection).
ScalarField project_tangent(const ScalarField& f, const ScalarField& u);

struct HessianReport {
  ScalarField f_at;
  double min_eigenvalue = 0.0;
  ScalarField eigenvector;  // unit L2 norm, tangent at f_at
  int iterations = 0;
  double residual = 0.0;
  Classification classification = Classification::Degenerate;
};

struct EigenOptions {
  int max_iterations = 2000;
  std::uint64_t seed = 1;
};

/// Minimizes the Rayleigh quotient of the second variation over the
/// tangent space at f (plain L2 denominator).
HessianReport hessian_min_eigen(const ScalarField& f, const Background& bg,
                                double tol, const EigenOptions& options = {});

void require_balanced(const Background& bg);

}  // namespace cyflow
