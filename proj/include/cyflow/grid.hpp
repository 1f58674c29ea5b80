#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace cyflow {

/// Uniform periodic grid on the flat complex n-torus, i.e. a real 2n-torus
/// with coordinate periods L_1..L_2n. The measure is normalized so that the
/// whole torus has volume one.
class TorusGrid {
 public:
  TorusGrid(int complex_dim, std::vector<double> periods,
            std::vector<int> resolution);

  /// Unit periods, the same even resolution on every axis.
  static TorusGrid unit(int complex_dim, int points_per_axis);

  [[nodiscard]] int complex_dim() const noexcept { return complex_dim_; }
  [[nodiscard]] int real_dim() const noexcept { return 2 * complex_dim_; }
  [[nodiscard]] std::span<const double> periods() const noexcept {
    return periods_;
  }
  [[nodiscard]] std::span<const int> resolution() const noexcept {
    return resolution_;
  }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] double cell_volume() const noexcept { return cell_volume_; }
  [[nodiscard]] double spacing(int axis) const;
  [[nodiscard]] double min_spacing() const noexcept;
  [[nodiscard]] double max_spacing() const noexcept;
  /// Product of the periods (Euclidean volume of the fundamental domain).
  [[nodiscard]] double euclidean_volume() const noexcept;

  /// Coordinate of grid index `index` along `axis`.
  [[nodiscard]] double coordinate(int axis, int index) const {
    return spacing(axis) * index;
  }

  /// Row-major multi-index of a flat offset, axis 0 outermost.
  void unravel(std::size_t flat, std::span<int> index) const;

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) noexcept {
    return a.complex_dim_ == b.complex_dim_ && a.periods_ == b.periods_ &&
           a.resolution_ == b.resolution_;
  }

 private:
  int complex_dim_;
  std::vector<double> periods_;
  std::vector<int> resolution_;
  std::size_t size_ = 1;
  double cell_volume_ = 1.0;
};

using GridPtr = std::shared_ptr<const TorusGrid>;

GridPtr make_grid(int complex_dim, std::vector<double> periods,
                  std::vector<int> resolution);
GridPtr make_unit_grid(int complex_dim, int points_per_axis);

}  // namespace cyflow
