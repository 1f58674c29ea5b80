#include "cyflow/stepper.hpp"

#include "cyflow/error.hpp"

namespace cyflow {

SystemStepper::SystemStepper(const GridPtr& grid, std::size_t components)
    : ws_(*grid),
      stage_(components, ScalarField(grid)),
      slope_(components, ScalarField(grid)),
      acc_(components, ScalarField(grid)),
      scratch_(grid) {}

void SystemStepper::rk4(FieldSystem& system, std::vector<ScalarField>& y,
                        double dt) {
  const std::size_t m = y.size();
  if (m != stage_.size() || m != system.components()) {
    throw Error(ErrorKind::InvalidArgument, "system size mismatch");
  }
  const std::size_t n = y.front().size();
  static constexpr double kStageNode[3] = {0.5, 0.5, 1.0};
  static constexpr double kWeight[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0,
                                        1.0 / 6.0};

  system.evaluate(y, slope_);
  for (std::size_t c = 0; c < m; ++c) {
    const double* yc = y[c].data();
    const double* k = slope_[c].data();
    double* acc = acc_[c].data();
    double* st = stage_[c].data();
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] = yc[i] + kWeight[0] * dt * k[i];
      st[i] = yc[i] + kStageNode[0] * dt * k[i];
    }
  }
  for (int s = 1; s < 4; ++s) {
    system.evaluate(stage_, slope_);
    for (std::size_t c = 0; c < m; ++c) {
      const double* yc = y[c].data();
      const double* k = slope_[c].data();
      double* acc = acc_[c].data();
      double* st = stage_[c].data();
      const double w = kWeight[s] * dt;
      if (s < 3) {
        const double a = kStageNode[s] * dt;
        for (std::size_t i = 0; i < n; ++i) {
          acc[i] += w * k[i];
          st[i] = yc[i] + a * k[i];
        }
      } else {
        for (std::size_t i = 0; i < n; ++i) acc[i] += w * k[i];
      }
    }
  }
  for (std::size_t c = 0; c < m; ++c) std::swap(y[c], acc_[c]);
}

void SystemStepper::semi_implicit(FieldSystem& system,
                                  std::vector<ScalarField>& y, double dt) {
  const std::size_t m = y.size();
  if (m != stage_.size() || m != system.components()) {
    throw Error(ErrorKind::InvalidArgument, "system size mismatch");
  }
  const std::size_t n = y.front().size();
  std::vector<double> coefficient(m);
  for (std::size_t c = 0; c < m; ++c) {
    coefficient[c] = system.implicit_coefficient(y, c);
  }
  system.evaluate(y, slope_);
  for (std::size_t c = 0; c < m; ++c) {
    double* st = stage_[c].data();
    const double* yc = y[c].data();
    const double* k = slope_[c].data();
    const double coef = coefficient[c];
    if (coef == 0.0) {
      for (std::size_t i = 0; i < n; ++i) st[i] = yc[i] + dt * k[i];
      std::swap(y[c], stage_[c]);
      continue;
    }
    ws_.laplacian(yc, scratch_.data());
    const double* lap = scratch_.data();
    for (std::size_t i = 0; i < n; ++i) {
      st[i] = yc[i] + dt * (k[i] - coef * lap[i]);
    }
    ws_.helmholtz_solve(st, dt * coef, y[c].data());
  }
}

}  // namespace cyflow
