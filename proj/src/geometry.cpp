#include "cyflow/geometry.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "cyflow/error.hpp"
#include "cyflow/spectral.hpp"
#include "vecmath.hpp"

namespace cyflow {

namespace {

constexpr double kGauduchonTol = 1e-8;
constexpr double kMeanTol = 1e-10;

}  // namespace

Background::Background(ScalarField s_base, CovectorField torsion)
    : s_base_(std::move(s_base)), torsion_(std::move(torsion)) {
  validate();
  balanced_ = torsion_.is_zero();
  lambda_ = integrate(s_base_);
}

Background::Background(ScalarField s_base)
    : Background(s_base, CovectorField::zero(s_base.grid_ptr())) {}

Background Background::constant(const GridPtr& grid, double lambda) {
  return Background(ScalarField(grid, lambda));
}

void Background::validate() const {
  if (!s_base_.all_finite()) {
    throw Error(ErrorKind::InvalidBackground, "s_base has non-finite values");
  }
  if (!torsion_.grid || static_cast<int>(torsion_.components.size()) !=
                            s_base_.grid().real_dim()) {
    throw Error(ErrorKind::InvalidBackground,
                "torsion needs one component per real coordinate");
  }
  for (const auto& c : torsion_.components) {
    require_same_grid(s_base_.grid(), c.grid());
  }
  if (!torsion_.all_finite()) {
    throw Error(ErrorKind::InvalidBackground, "torsion has non-finite values");
  }
  if (torsion_.is_zero()) return;

  // Integral of the Chern Laplacian equals the integral of f * div(theta).
  double theta_max = 0.0;
  for (const auto& c : torsion_.components) {
    theta_max = std::max(theta_max, c.max_abs());
  }
  const double div_max = divergence(torsion_).max_abs();
  if (div_max > kGauduchonTol * (1.0 + theta_max)) {
    std::ostringstream msg;
    msg << "torsion is not divergence-free (max |div theta| = " << div_max
        << "); the background would not be Gauduchon";
    throw Error(ErrorKind::InvalidBackground, msg.str());
  }
  std::mt19937_64 rng(0x6a09e667f3bcc909ULL);
  for (int probe = 0; probe < 4; ++probe) {
    const ScalarField phi = random_band_limited(s_base_.grid_ptr(), 6, rng);
    const double mean = integrate(laplacian(phi) -
                                  pairing(gradient(phi), torsion_));
    if (std::abs(mean) > kGauduchonTol * phi.max_abs()) {
      std::ostringstream msg;
      msg << "Chern Laplacian does not integrate to zero (" << mean << ")";
      throw Error(ErrorKind::InvalidBackground, msg.str());
    }
  }
}

ScalarField chern_laplacian(const ScalarField& f, const Background& bg) {
  require_same_grid(f.grid(), bg.grid());
  ScalarField out = laplacian(f);
  if (bg.balanced()) return out;
  out -= pairing(gradient(f), bg.torsion());
  return out;
}

void check_overflow(const ScalarField& f, double overflow_bound) {
  const double n = f.grid().complex_dim();
  const double m = f.all_finite()
                       ? 2.0 * f.max_abs() / n
                       : std::numeric_limits<double>::infinity();
  if (!(m <= overflow_bound)) {
    std::ostringstream msg;
    msg << "max|2f/n| = " << m << " exceeds " << overflow_bound;
    throw Error(ErrorKind::Divergence, msg.str());
  }
}

ScalarField chern_scalar(const ScalarField& f, const Background& bg,
                         double overflow_bound) {
  check_overflow(f, overflow_bound);
  const double n = bg.complex_dim();
  ScalarField out = chern_laplacian(f, bg);
  const auto& s = bg.s_base();
  AlignedVector<double> decay(out.size());
  detail::exp_scaled(f.data(), -2.0 / n, decay.data(), out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = decay[i] * (s[i] - out[i]);
  }
  return out;
}

double total_scalar(const Background& bg) { return bg.lambda_total(); }

double conformal_mass(const ScalarField& f) {
  const double n = f.grid().complex_dim();
  return integrate(map(f, [n](double v) { return std::exp(2.0 * v / n); }));
}

ScalarField normalize_conformal(const ScalarField& f, double overflow_bound) {
  check_overflow(f, overflow_bound);
  const double n = f.grid().complex_dim();
  // Factor out the maximum so the mass never overflows.
  const double top = f.max();
  const double shifted_mass = integrate(
      map(f, [n, top](double v) { return std::exp(2.0 * (v - top) / n); }));
  const double c = -top - 0.5 * n * std::log(shifted_mass);
  return f + c;
}

ScalarField solve_poisson(const ScalarField& rhs, const Background& bg,
                          double tol, int max_iterations) {
  require_same_grid(rhs.grid(), bg.grid());
  const double mean = integrate(rhs);
  if (std::abs(mean) > kMeanTol) {
    std::ostringstream msg;
    msg << "Poisson right-hand side has mean " << mean;
    throw Error(ErrorKind::NonZeroMean, msg.str());
  }
  ScalarField u = inverse_laplacian(rhs);
  if (bg.balanced()) return u;

  double previous = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < max_iterations; ++it) {
    ScalarField residual = rhs - chern_laplacian(u, bg);
    const double r = residual.max_abs();
    if (r <= tol) return u;
    stalled = (r > 0.99 * previous) ? stalled + 1 : 0;
    if (stalled >= 5) break;
    previous = r;
    u += inverse_laplacian(residual);
  }
  std::ostringstream msg;
  msg << "torsion Poisson iteration did not reach residual " << tol;
  throw Error(ErrorKind::NoConvergence, msg.str());
}

ScalarField canonical_initial(const Background& bg) {
  ScalarField rhs = bg.s_base() - bg.lambda_total();
  const double tol = 1e-11 * (1.0 + rhs.max_abs());
  ScalarField h = normalize_conformal(solve_poisson(rhs, bg, tol));
  if (bg.lambda_total() > 0.0) {
    const double s_min = chern_scalar(h, bg).min();
    if (!(s_min > 0.0)) {
      std::ostringstream msg;
      msg << "canonical initial datum has min S = " << s_min
          << " despite positive total scalar curvature";
      throw Error(ErrorKind::BoundViolation, msg.str());
    }
  }
  return h;
}

}  // namespace cyflow
