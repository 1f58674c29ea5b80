#include "vecmath.hpp"

#include <cmath>

namespace cyflow::detail {

void exp_scaled(const double* __restrict in, double scale,
                double* __restrict out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(scale * in[i]);
}

}  // namespace cyflow::detail
