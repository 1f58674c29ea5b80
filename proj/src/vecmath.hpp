#pragma once

#include <cstddef>

namespace cyflow::detail {

// out[i] = exp(scale * in[i]); vectorized, may differ from std::exp in the last ulp.
void exp_scaled(const double* in, double scale, double* out, std::size_t n);

}  // namespace cyflow::detail
