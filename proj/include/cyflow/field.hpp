#pragma once

#include <cstddef>
#include <functional>
#include <new>
#include <span>
#include <vector>

#include "cyflow/grid.hpp"

namespace cyflow {

namespace detail {
void* simd_alloc(std::size_t bytes);
void simd_free(void* p) noexcept;
}  // namespace detail

/// Allocator returning FFT-compatible (SIMD aligned) storage.
template <class T>
struct SimdAllocator {
  using value_type = T;
  SimdAllocator() noexcept = default;
  template <class U>
  SimdAllocator(const SimdAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    return static_cast<T*>(detail::simd_alloc(n * sizeof(T)));
  }
  void deallocate(T* p, std::size_t) noexcept { detail::simd_free(p); }
  template <class U>
  friend bool operator==(const SimdAllocator&, const SimdAllocator<U>&) {
    return true;
  }
};

template <class T>
using AlignedVector = std::vector<T, SimdAllocator<T>>;

/// Real grid function, row-major with axis 0 outermost.
class ScalarField {
 public:
  explicit ScalarField(GridPtr grid, double value = 0.0);
  ScalarField(GridPtr grid, std::span<const double> values);

  /// Samples `fn(x)` at every grid point, x being the 2n real coordinates.
  static ScalarField from_function(
      GridPtr grid, const std::function<double(std::span<const double>)>& fn);

  [[nodiscard]] const TorusGrid& grid() const noexcept { return *grid_; }
  [[nodiscard]] const GridPtr& grid_ptr() const noexcept { return grid_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::span<const double> values() const noexcept {
    return values_;
  }
  [[nodiscard]] double* data() noexcept { return values_.data(); }
  [[nodiscard]] const double* data() const noexcept { return values_.data(); }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  [[nodiscard]] double min() const;
  [[nodiscard]] double max() const;
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] bool all_finite() const noexcept;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(const ScalarField& other);
  ScalarField& operator+=(double c) noexcept;
  ScalarField& operator-=(double c) noexcept { return *this += -c; }
  ScalarField& operator*=(double c) noexcept;

  /// a += c * b
  ScalarField& add_scaled(double c, const ScalarField& b);

 private:
  GridPtr grid_;
  AlignedVector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator+(ScalarField a, double c);
ScalarField operator-(ScalarField a, double c);
ScalarField operator*(ScalarField a, double c);
ScalarField operator*(double c, ScalarField a);
ScalarField operator-(ScalarField a);

/// Pointwise map.
ScalarField map(const ScalarField& a, const std::function<double(double)>& fn);
ScalarField exp(const ScalarField& a);

/// Largest pointwise |a - b|.
double max_abs_diff(const ScalarField& a, const ScalarField& b);

void require_same_grid(const TorusGrid& a, const TorusGrid& b);

/// One real field per coordinate direction (flat metric, so vectors and
/// covectors share components).
struct CovectorField {
  GridPtr grid;
  std::vector<ScalarField> components;

  static CovectorField zero(GridPtr grid);
  [[nodiscard]] bool is_zero() const noexcept;
  [[nodiscard]] bool all_finite() const noexcept;
};

}  // namespace cyflow
