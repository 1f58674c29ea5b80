#include "cyflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cyflow/error.hpp"

namespace cyflow {

TorusGrid::TorusGrid(int complex_dim, std::vector<double> periods,
                     std::vector<int> resolution)
    : complex_dim_(complex_dim),
      periods_(std::move(periods)),
      resolution_(std::move(resolution)) {
  if (complex_dim_ < 1) {
    throw Error(ErrorKind::InvalidGrid, "complex dimension must be positive");
  }
  const auto dims = static_cast<std::size_t>(2 * complex_dim_);
  if (periods_.size() != dims || resolution_.size() != dims) {
    throw Error(ErrorKind::InvalidGrid,
                "expected " + std::to_string(dims) +
                    " periods and resolutions for complex dimension " +
                    std::to_string(complex_dim_));
  }
  for (std::size_t i = 0; i < dims; ++i) {
    if (!(periods_[i] > 0.0) || !std::isfinite(periods_[i])) {
      throw Error(ErrorKind::InvalidGrid, "periods must be positive");
    }
    if (resolution_[i] < 4 || resolution_[i] % 2 != 0) {
      throw Error(ErrorKind::InvalidGrid,
                  "resolutions must be even and at least 4");
    }
    size_ *= static_cast<std::size_t>(resolution_[i]);
  }
  // prod(L_i/N_i) / prod(L_i) == 1 / prod(N_i)
  cell_volume_ = 1.0 / static_cast<double>(size_);
}

TorusGrid TorusGrid::unit(int complex_dim, int points_per_axis) {
  const auto dims = static_cast<std::size_t>(std::max(2 * complex_dim, 0));
  return TorusGrid(complex_dim, std::vector<double>(dims, 1.0),
                   std::vector<int>(dims, points_per_axis));
}

double TorusGrid::spacing(int axis) const {
  return periods_.at(static_cast<std::size_t>(axis)) /
         resolution_.at(static_cast<std::size_t>(axis));
}

double TorusGrid::min_spacing() const noexcept {
  double h = spacing(0);
  for (int a = 1; a < real_dim(); ++a) h = std::min(h, spacing(a));
  return h;
}

double TorusGrid::max_spacing() const noexcept {
  double h = spacing(0);
  for (int a = 1; a < real_dim(); ++a) h = std::max(h, spacing(a));
  return h;
}

double TorusGrid::euclidean_volume() const noexcept {
  return std::accumulate(periods_.begin(), periods_.end(), 1.0,
                         std::multiplies<>());
}

void TorusGrid::unravel(std::size_t flat, std::span<int> index) const {
  for (int a = real_dim() - 1; a >= 0; --a) {
    const auto n = static_cast<std::size_t>(resolution_[a]);
    index[a] = static_cast<int>(flat % n);
    flat /= n;
  }
}

GridPtr make_grid(int complex_dim, std::vector<double> periods,
                  std::vector<int> resolution) {
  return std::make_shared<const TorusGrid>(complex_dim, std::move(periods),
                                           std::move(resolution));
}

GridPtr make_unit_grid(int complex_dim, int points_per_axis) {
  return std::make_shared<const TorusGrid>(
      TorusGrid::unit(complex_dim, points_per_axis));
}

}  // namespace cyflow
