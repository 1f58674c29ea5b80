#include "cyflow/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>

#include "cyflow/error.hpp"

namespace cyflow {

namespace detail {
void* simd_alloc(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (p == nullptr) throw std::bad_alloc();
  return p;
}
void simd_free(void* p) noexcept { fftw_free(p); }
}  // namespace detail

void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
  if (&a != &b && !(a == b)) {
    throw Error(ErrorKind::GridMismatch, "fields live on different grids");
  }
}

ScalarField::ScalarField(GridPtr grid, double value)
    : grid_(std::move(grid)), values_(grid_->size(), value) {}

ScalarField::ScalarField(GridPtr grid, std::span<const double> values)
    : grid_(std::move(grid)), values_(values.begin(), values.end()) {
  if (values_.size() != grid_->size()) {
    throw Error(ErrorKind::GridMismatch, "value count does not match grid");
  }
}

ScalarField ScalarField::from_function(
    GridPtr grid, const std::function<double(std::span<const double>)>& fn) {
  ScalarField out(grid);
  const int d = grid->real_dim();
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < out.size(); ++i) {
    grid->unravel(i, idx);
    for (int a = 0; a < d; ++a) x[a] = grid->coordinate(a, idx[a]);
    out.values_[i] = fn(x);
  }
  return out;
}

double ScalarField::min() const {
  return *std::min_element(values_.begin(), values_.end());
}

double ScalarField::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(*grid_, *other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(*grid_, *other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other[i];
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& other) {
  require_same_grid(*grid_, *other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= other[i];
  return *this;
}

ScalarField& ScalarField::operator+=(double c) noexcept {
  for (double& v : values_) v += c;
  return *this;
}

ScalarField& ScalarField::operator*=(double c) noexcept {
  for (double& v : values_) v *= c;
  return *this;
}

ScalarField& ScalarField::add_scaled(double c, const ScalarField& b) {
  require_same_grid(*grid_, *b.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * b[i];
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator+(ScalarField a, double c) { return a += c; }
ScalarField operator-(ScalarField a, double c) { return a -= c; }
ScalarField operator*(ScalarField a, double c) { return a *= c; }
ScalarField operator*(double c, ScalarField a) { return a *= c; }
ScalarField operator-(ScalarField a) { return a *= -1.0; }

ScalarField map(const ScalarField& a,
                const std::function<double(double)>& fn) {
  ScalarField out(a.grid_ptr());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i]);
  return out;
}

ScalarField exp(const ScalarField& a) {
  ScalarField out(a.grid_ptr());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::exp(a[i]);
  return out;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

CovectorField CovectorField::zero(GridPtr grid) {
  CovectorField out{grid, {}};
  for (int a = 0; a < grid->real_dim(); ++a) out.components.emplace_back(grid);
  return out;
}

bool CovectorField::is_zero() const noexcept {
  return std::all_of(components.begin(), components.end(),
                     [](const ScalarField& c) {
                       return std::all_of(c.values().begin(), c.values().end(),
                                          [](double v) { return v == 0.0; });
                     });
}

bool CovectorField::all_finite() const noexcept {
  return std::all_of(components.begin(), components.end(),
                     [](const ScalarField& c) { return c.all_finite(); });
}

}  // namespace cyflow
