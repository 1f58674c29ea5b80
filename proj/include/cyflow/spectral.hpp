#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <span>

#include "cyflow/field.hpp"

namespace cyflow {

using Complex = std::complex<double>;

/// FFT plans and Fourier symbols for one grid shape. Immutable once built;
/// execution is thread-safe because every call supplies its own arrays.
class SpectralPlan {
 public:
  /// Cached per (periods, resolution); planning itself is serialized.
  static std::shared_ptr<const SpectralPlan> for_grid(const TorusGrid& grid);

  explicit SpectralPlan(const TorusGrid& grid);
  ~SpectralPlan();
  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;

  [[nodiscard]] std::size_t field_size() const noexcept { return field_size_; }
  [[nodiscard]] std::size_t spectrum_size() const noexcept {
    return spectrum_size_;
  }

  /// Unnormalized r2c transform; `in` is preserved.
  void forward(const double* in, Complex* out) const;
  /// c2r transform including the 1/N normalization; `in` is destroyed.
  void inverse(Complex* in, double* out) const;
  /// c2r transform without normalization; `in` is destroyed.
  void inverse_unscaled(Complex* in, double* out) const;

  /// -|xi|^2 per spectral coefficient (Nyquist modes included).
  [[nodiscard]] std::span<const double> laplacian_symbol() const noexcept {
    return laplacian_symbol_;
  }
  /// Laplacian symbol with the inverse-transform 1/N folded in.
  [[nodiscard]] std::span<const double> scaled_laplacian_symbol() const noexcept {
    return scaled_laplacian_symbol_;
  }
  /// xi_axis per spectral coefficient, zero on the axis's Nyquist plane.
  [[nodiscard]] std::span<const double> wavenumber(int axis) const {
    return wavenumbers_.at(static_cast<std::size_t>(axis));
  }
  /// 1 where the 2/3-rule keeps the coefficient.
  [[nodiscard]] std::span<const std::uint8_t> dealias_mask() const noexcept {
    return dealias_mask_;
  }

 private:
  std::size_t field_size_ = 0;
  std::size_t spectrum_size_ = 0;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
  AlignedVector<double> laplacian_symbol_;
  AlignedVector<double> scaled_laplacian_symbol_;
  std::vector<AlignedVector<double>> wavenumbers_;
  std::vector<std::uint8_t> dealias_mask_;
};

/// Caps FFT worker threads for plans created afterwards.
void set_fft_threads(int threads);

/// Coefficients of the r2c transform of a field.
struct Spectrum {
  GridPtr grid;
  AlignedVector<Complex> coefficients;
};

Spectrum forward_transform(const ScalarField& phi);
ScalarField inverse_transform(Spectrum spectrum);

/// Reusable scratch for repeated spectral operations on one grid.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const TorusGrid& grid);

  void laplacian(const double* in, double* out);
  void derivative(const double* in, int axis, double* out);
  /// Mean-zero inverse of the Laplacian.
  void inverse_laplacian(const double* in, double* out);
  /// Solves (1 - c * Laplacian) out = in.
  void helmholtz_solve(const double* in, double c, double* out);
  void dealias(const double* in, double* out);

  [[nodiscard]] const SpectralPlan& plan() const noexcept { return *plan_; }

 private:
  std::shared_ptr<const SpectralPlan> plan_;
  AlignedVector<Complex> spectrum_;
};

/// Mean over the unit-volume torus (periodic trapezoid rule).
double integrate(const ScalarField& phi);
/// L2 norm with respect to the unit-volume measure.
double l2_norm(const ScalarField& phi);
double inner(const ScalarField& a, const ScalarField& b);

/// Negative semidefinite spectral Laplacian: multiplier -|xi|^2.
ScalarField laplacian(const ScalarField& phi);
CovectorField gradient(const ScalarField& phi);
ScalarField divergence(const CovectorField& v);
/// Pointwise Euclidean inner product.
ScalarField pairing(const CovectorField& a, const CovectorField& b);
/// Mean-zero solution u of laplacian(u) = rhs - mean(rhs).
ScalarField inverse_laplacian(const ScalarField& rhs);
/// 2/3-rule truncation.
ScalarField dealias(const ScalarField& phi);

/// Random trigonometric polynomial with every |k_i| <= max_mode.
ScalarField random_band_limited(const GridPtr& grid, int max_mode,
                                std::mt19937_64& rng, int terms = 8);

}  // namespace cyflow
