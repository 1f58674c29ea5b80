#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "cyflow/field.hpp"
#include "cyflow/grid.hpp"

namespace testing {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Fn = std::function<double(std::span<const double>)>;

inline cyflow::ScalarField sample(const cyflow::GridPtr& g, const Fn& fn) {
  return cyflow::ScalarField::from_function(g, fn);
}

// Plain sum times cell volume, kept separate from the library quadrature.
inline double mean_of(const cyflow::ScalarField& a) {
  long double s = 0.0L;
  for (double v : a.values()) s += v;
  return static_cast<double>(s / static_cast<long double>(a.size()));
}

// Second-order centered differences on a periodic grid of any dimension.
inline cyflow::ScalarField fd_laplacian(const cyflow::ScalarField& a) {
  const auto& g = a.grid();
  const int d = g.real_dim();
  std::vector<std::size_t> stride(static_cast<std::size_t>(d), 1);
  for (int k = d - 2; k >= 0; --k) {
    stride[static_cast<std::size_t>(k)] =
        stride[static_cast<std::size_t>(k + 1)] *
        static_cast<std::size_t>(g.resolution()[static_cast<std::size_t>(k + 1)]);
  }
  cyflow::ScalarField out(a.grid_ptr());
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < a.size(); ++i) {
    g.unravel(i, idx);
    double acc = 0.0;
    for (int k = 0; k < d; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const int n = g.resolution()[ku];
      const double h = g.spacing(k);
      const std::size_t up =
          i + (idx[ku] == n - 1 ? 0 : stride[ku]) -
          (idx[ku] == n - 1 ? static_cast<std::size_t>(n - 1) * stride[ku] : 0);
      const std::size_t dn =
          i - (idx[ku] == 0 ? 0 : stride[ku]) +
          (idx[ku] == 0 ? static_cast<std::size_t>(n - 1) * stride[ku] : 0);
      acc += (a[up] - 2.0 * a[i] + a[dn]) / (h * h);
    }
    out[i] = acc;
  }
  return out;
}

inline double rel_l2(const cyflow::ScalarField& a, const cyflow::ScalarField& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace testing
