#pragma once

#include <span>
#include <vector>

#include "cyflow/field.hpp"
#include "cyflow/spectral.hpp"

namespace cyflow {

/// Autonomous system dy/dt = F(y) over a fixed number of grid fields.
class FieldSystem {
 public:
  virtual ~FieldSystem() = default;
  [[nodiscard]] virtual std::size_t components() const = 0;
  virtual void evaluate(std::span<const ScalarField> y,
                        std::span<ScalarField> dydt) = 0;
  /// Constant coefficient c of the c * Laplacian part of component `c`
  /// treated implicitly by the semi-implicit split; zero means none.
  virtual double implicit_coefficient(std::span<const ScalarField> y,
                                      std::size_t component) = 0;
};

/// Owns the stage buffers so repeated steps do not allocate.
class SystemStepper {
 public:
  SystemStepper(const GridPtr& grid, std::size_t components);

  /// Classical fourth-order Runge-Kutta step.
  void rk4(FieldSystem& system, std::vector<ScalarField>& y, double dt);

  /// First-order step: (1 - dt c lap) y+ = y + dt (F(y) - c lap y).
  void semi_implicit(FieldSystem& system, std::vector<ScalarField>& y,
                     double dt);

 private:
  SpectralWorkspace ws_;
  std::vector<ScalarField> stage_;
  std::vector<ScalarField> slope_;
  std::vector<ScalarField> acc_;
  ScalarField scratch_;
};

}  // namespace cyflow
