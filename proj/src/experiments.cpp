#include "cyflow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include "cyflow/error.hpp"
#include "cyflow/spectral.hpp"
#include "cyflow/stepper.hpp"
#include "vecmath.hpp"

namespace cyflow {
namespace {

constexpr double kMassTol = 1e-10;
constexpr double kMinAnnulusCells = 4.0;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double euclidean_volume(const std::vector<double>& periods) {
  double v = 1.0;
  for (double l : periods) v *= l;
  return v;
}

// Composite Gauss-Legendre; the integrands are smooth but may vary by
// e^{2 |c_r - log r| / n} across the annulus.
double annulus_integral(const std::function<double(double)>& fn, double a,
                        double b) {
  using boost::math::quadrature::gauss;
  constexpr int kPanels = 16;
  const double h = (b - a) / kPanels;
  double sum = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    sum += gauss<double, 30>::integrate(fn, a + k * h, a + (k + 1) * h);
  }
  return sum;
}

bool is_constant(const ScalarField& s) {
  return s.max() - s.min() <= 1e-12 * (1.0 + std::abs(s.max()));
}

void check_fits(double r, const std::vector<double>& periods) {
  const double l_min = *std::min_element(periods.begin(), periods.end());
  if (!(r > 0.0) || !(2.0 * r < 0.5 * l_min)) {
    std::ostringstream msg;
    msg << "bump with r = " << r << " needs 0 < 2r < " << 0.5 * l_min;
    throw Error(ErrorKind::BumpDoesNotFit, msg.str());
  }
}

}  // namespace

double unit_ball_volume(int complex_dim) {
  return std::pow(std::numbers::pi, complex_dim) /
         std::tgamma(static_cast<double>(complex_dim) + 1.0);
}

double BumpProfile::value_at(double rho) const noexcept {
  if (rho <= r) return c_r;
  if (rho >= 2.0 * r) return outer_value;
  return c_r + (outer_value - c_r) * (rho - r) / r;
}

double BumpProfile::annulus_slope() const noexcept {
  return (c_r - outer_value) / r;
}

double BumpProfile::c_bound() const {
  const double dn = n;
  return -dn * dn * std::log(r) - 0.5 * dn * std::log(unit_ball_volume(n));
}

RadialOracle radial_integrals(const BumpProfile& p,
                              const std::vector<double>& periods) {
  const double vol = euclidean_volume(periods);
  const int m = 2 * p.n;
  const double ball = unit_ball_volume(p.n);
  const double sphere = static_cast<double>(m) * ball;
  const double inner = ball * std::pow(p.r, m) / vol;
  const double outer_fraction = 1.0 - ball * std::pow(2.0 * p.r, m) / vol;
  const double dn = p.n;

  RadialOracle out;
  const double shell_mass = annulus_integral(
      [&](double rho) {
        return std::exp(2.0 * p.value_at(rho) / dn) * std::pow(rho, m - 1);
      },
      p.r, 2.0 * p.r);
  out.mass = std::exp(2.0 * p.c_r / dn) * inner +
             sphere * shell_mass / vol +
             std::exp(2.0 * p.outer_value / dn) * outer_fraction;

  const double shell_mean = annulus_integral(
      [&](double rho) { return p.value_at(rho) * std::pow(rho, m - 1); }, p.r,
      2.0 * p.r);
  out.mean = p.c_r * inner + sphere * shell_mean / vol +
             p.outer_value * outer_fraction;

  const double s = p.annulus_slope();
  out.dirichlet = 0.5 * s * s * ball *
                  (std::pow(2.0 * p.r, m) - std::pow(p.r, m)) / vol;
  return out;
}

BumpProfile solve_bump(double r, std::vector<double> center, int complex_dim,
                       const std::vector<double>& periods) {
  if (complex_dim < 1 ||
      periods.size() != static_cast<std::size_t>(2 * complex_dim) ||
      center.size() != periods.size()) {
    throw Error(ErrorKind::InvalidArgument, "bump dimension mismatch");
  }
  check_fits(r, periods);
  BumpProfile p;
  p.r = r;
  p.center = std::move(center);
  p.n = complex_dim;
  p.outer_value = std::log(r);

  auto residual = [&](double c) {
    BumpProfile q = p;
    q.c_r = c;
    return radial_integrals(q, periods).mass - 1.0;
  };
  double lo = p.outer_value;
  while (residual(lo) >= 0.0) lo -= 1.0 + std::abs(lo);
  double hi = p.outer_value + 1.0;
  while (residual(hi) <= 0.0) hi += 1.0 + std::abs(hi);

  std::uintmax_t max_iter = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      residual, lo, hi, boost::math::tools::eps_tolerance<double>(52),
      max_iter);
  const double r_lo = residual(bracket.first);
  const double r_hi = residual(bracket.second);
  p.c_r = std::abs(r_lo) <= std::abs(r_hi) ? bracket.first : bracket.second;
  const double err = std::min(std::abs(r_lo), std::abs(r_hi));
  if (!(err <= kMassTol)) {
    std::ostringstream msg;
    msg << "bump normalization stalled at mass error " << err;
    throw Error(ErrorKind::NoConvergence, msg.str());
  }
  return p;
}

double periodic_distance(std::span<const double> x,
                         const std::vector<double>& center,
                         const std::vector<double>& periods) {
  double d2 = 0.0;
  for (std::size_t a = 0; a < periods.size(); ++a) {
    double d = x[a] - center[a];
    d -= periods[a] * std::round(d / periods[a]);
    d2 += d * d;
  }
  return std::sqrt(d2);
}

BumpField bump_family(double r, const std::vector<double>& center,
                      const Background& bg) {
  const TorusGrid& grid = bg.grid();
  std::vector<double> periods(grid.periods().begin(), grid.periods().end());
  BumpProfile p = solve_bump(r, center, grid.complex_dim(), periods);
  if (r < kMinAnnulusCells * grid.max_spacing() * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "annulus width " << r << " spans fewer than "
        << kMinAnnulusCells << " cells of size " << grid.max_spacing();
    throw Error(ErrorKind::ResolutionTooCoarse, msg.str());
  }
  ScalarField field = ScalarField::from_function(
      bg.grid_ptr(), [&](std::span<const double> x) {
        return p.value_at(periodic_distance(x, p.center, periods));
      });
  const double mass = conformal_mass(field);
  return BumpField{std::move(p), std::move(field), mass};
}

double bump_energy_grid(const BumpField& bump, const Background& bg) {
  require_balanced(bg);
  require_same_grid(bump.field.grid(), bg.grid());
  const TorusGrid& grid = bg.grid();
  const BumpProfile& p = bump.profile;
  std::vector<double> periods(grid.periods().begin(), grid.periods().end());
  const int d = grid.real_dim();
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::vector<double> x(static_cast<std::size_t>(d));
  const double edge = 1e-12 * p.r;
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.unravel(i, idx);
    for (int a = 0; a < d; ++a) x[a] = grid.coordinate(a, idx[a]);
    const double rho = periodic_distance(x, p.center, periods);
    if (rho < p.r - edge || rho > 2.0 * p.r + edge) continue;
    const bool boundary =
        std::abs(rho - p.r) <= edge || std::abs(rho - 2.0 * p.r) <= edge;
    weight_sum += boundary ? 0.5 : 1.0;
  }
  const double s = p.annulus_slope();
  return 0.5 * s * s * weight_sum * grid.cell_volume() +
         integrate(bg.s_base() * bump.field);
}

std::vector<double> default_center(const TorusGrid& grid) {
  std::vector<double> c(static_cast<std::size_t>(grid.real_dim()));
  for (int a = 0; a < grid.real_dim(); ++a) {
    c[a] = grid.coordinate(a, grid.resolution()[a] / 2);
  }
  return c;
}

SweepTable unboundedness_sweep(const std::vector<double>& r_list,
                               const Background& bg,
                               std::optional<std::vector<double>> center) {
  require_balanced(bg);
  const TorusGrid& grid = bg.grid();
  if (grid.complex_dim() < 2) {
    throw Error(ErrorKind::InvalidBackground,
                "unboundedness sweep needs complex dimension >= 2");
  }
  const double lambda = bg.lambda_total();
  if (!(lambda > 0.0)) {
    throw Error(ErrorKind::InvalidBackground,
                "unboundedness sweep needs positive total scalar curvature");
  }
  const std::vector<double> c = center ? *center : default_center(grid);
  std::vector<double> periods(grid.periods().begin(), grid.periods().end());

  SweepTable table;
  table.lambda = lambda;
  table.constant_s_base = is_constant(bg.s_base());
  for (double r : r_list) {
    SweepRow row;
    row.r = r;
    const BumpProfile p = solve_bump(r, c, grid.complex_dim(), periods);
    const RadialOracle oracle = radial_integrals(p, periods);
    row.c_r = p.c_r;
    row.c_bound = p.c_bound();
    row.oracle_mass = oracle.mass;
    row.oracle_energy = table.constant_s_base
                            ? oracle.dirichlet + lambda * oracle.mean
                            : kNaN;
    row.reference = 0.5 * lambda * std::log(r);
    row.ratio = row.oracle_energy / row.reference;
    row.grid_mass = kNaN;
    row.grid_energy = kNaN;
    row.spectral_energy = kNaN;
    try {
      const BumpField bump = bump_family(r, c, bg);
      row.grid_resolved = true;
      row.grid_mass = bump.grid_mass;
      row.grid_energy = bump_energy_grid(bump, bg);
      row.spectral_energy = energy(bump.field, bg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ResolutionTooCoarse) throw;
    }
    table.rows.push_back(row);
  }
  return table;
}

SaddleReport saddle_experiment(const Background& bg,
                               const SaddleOptions& options) {
  require_balanced(bg);
  if (!is_constant(bg.s_base())) {
    throw Error(ErrorKind::InvalidBackground,
                "saddle experiment needs constant s_base");
  }
  const TorusGrid& grid = bg.grid();
  const double n = grid.complex_dim();
  const double lambda = bg.lambda_total();

  const double l_max =
      *std::max_element(grid.periods().begin(), grid.periods().end());
  const double first_eigenvalue = std::pow(2.0 * std::numbers::pi / l_max, 2);
  if (!(2.0 * lambda / n > first_eigenvalue)) {
    std::ostringstream msg;
    msg << "2 lambda / n = " << 2.0 * lambda / n
        << " does not exceed lambda_1 = " << first_eigenvalue;
    throw Error(ErrorKind::NotUnstable, msg.str());
  }
  const ScalarField zero(bg.grid_ptr(), 0.0);
  HessianReport hessian = hessian_min_eigen(zero, bg, options.eigen_tol);
  if (hessian.classification != Classification::Saddle) {
    std::ostringstream msg;
    msg << "Hessian at f = 0 has min eigenvalue " << hessian.min_eigenvalue;
    throw Error(ErrorKind::NotUnstable, msg.str());
  }

  const ScalarField f0 =
      normalize_conformal(hessian.eigenvector * options.amplitude);
  const FlowState state0 = FlowState::make(f0, bg);
  ScalarField previous = f0;
  double max_step_change = 0.0;
  RunSinks sinks;
  sinks.on_step = [&](double, const ScalarField& f) {
    max_step_change = std::max(max_step_change, max_abs_diff(f, previous));
    previous = f;
  };
  if (options.stop_at_target) {
    sinks.stop_when = [&](const FlowState&, const SeriesRow& row) {
      return row.energy < options.energy_target;
    };
  }
  Trajectory trajectory = run(state0, bg, options.stepper, sinks);

  SaddleReport report{.hessian = std::move(hessian),
                      .first_eigenvalue = first_eigenvalue,
                      .amplitude = options.amplitude,
                      .trajectory = std::move(trajectory)};
  report.max_step_change = max_step_change;
  const auto& rows = report.trajectory.rows;
  report.energy_strictly_decreasing = rows.size() > 1;
  bool went_negative = false;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (j > 0 && !(rows[j].energy < rows[j - 1].energy)) {
      report.energy_strictly_decreasing = false;
    }
    if (!report.target_time && rows[j].energy < options.energy_target) {
      report.target_time = rows[j].t;
    }
    if (went_negative && rows[j].energy >= 0.0) {
      report.returned_to_nonnegative_energy = true;
    }
    if (rows[j].energy < 0.0) went_negative = true;
  }
  report.initial_distance = f0.max_abs();
  report.final_distance = report.trajectory.final_state.f.max_abs();
  return report;
}

namespace {

/// (f, w, v) with f the flow, w its linearized companion and v' = w.
class C0System : public FieldSystem {
 public:
  C0System(const Background& bg, bool dealias)
      : flow_(bg, dealias),
        lambda_(bg.lambda_total()),
        n_(bg.complex_dim()),
        lap_(bg.grid_ptr()),
        decay_(bg.grid_ptr()) {}

  [[nodiscard]] std::size_t components() const override { return 3; }

  void evaluate(std::span<const ScalarField> y,
                std::span<ScalarField> dydt) override {
    flow_.evaluate(y.subspan(0, 1), dydt.subspan(0, 1));
    flow_.chern_laplacian_into(y[1], lap_);
    detail::exp_scaled(y[0].data(), -2.0 / n_, decay_.data(), decay_.size());
    const double half_n = 0.5 * n_;
    const double* w = y[1].data();
    double* dw = dydt[1].data();
    double* dv = dydt[2].data();
    for (std::size_t i = 0; i < lap_.size(); ++i) {
      dw[i] = half_n * decay_[i] * lap_[i] + lambda_ * w[i];
      dv[i] = w[i];
    }
  }

  double implicit_coefficient(std::span<const ScalarField> y,
                              std::size_t component) override {
    if (component == 2) return 0.0;
    return 0.5 * n_ * std::exp(-2.0 * y[0].min() / n_);
  }

 private:
  FlowSystem flow_;
  double lambda_;
  double n_;
  ScalarField lap_;
  ScalarField decay_;
};

}  // namespace

C0Certificate c0_certificate(const ScalarField& f0, const Background& bg,
                             const StepperConfig& cfg) {
  cfg.validate();
  require_same_grid(f0.grid(), bg.grid());
  const double n = bg.complex_dim();
  const double lambda = bg.lambda_total();

  const ScalarField h_rhs = bg.s_base() - lambda;
  ScalarField h = normalize_conformal(
      solve_poisson(h_rhs, bg, 1e-11 * (1.0 + h_rhs.max_abs())));
  const double mass0 = conformal_mass(f0);
  if (std::abs(mass0 - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg << "initial datum is not normalized (mass " << mass0 << ")";
    throw Error(ErrorKind::NotNormalized, msg.str());
  }
  ScalarField v_rhs = map(f0, [n](double x) { return std::exp(2.0 * x / n); });
  v_rhs -= integrate(v_rhs);
  ScalarField v0 = solve_poisson(v_rhs, bg, 1e-11 * (1.0 + v_rhs.max_abs()));
  C0Certificate cert{.h = std::move(h), .v0 = std::move(v0)};
  cert.lambda = lambda;
  ScalarField w0 = f0 - cert.h + lambda * cert.v0;
  cert.K = w0.max_abs();

  C0System system(bg, cfg.dealias);
  SystemStepper stepper(f0.grid_ptr(), 3);
  std::vector<ScalarField> y{f0, std::move(w0), cert.v0};

  auto record = [&](double t) {
    C0Row row;
    row.t = t;
    row.w_norm = y[1].max_abs();
    row.bound = cert.K * std::exp(lambda * t);
    ScalarField recon = y[0] - y[1] - cert.h + lambda * y[2];
    row.reconstruction_error = recon.max_abs();
    ScalarField poisson = chern_laplacian(y[2], bg);
    for (std::size_t i = 0; i < poisson.size(); ++i) {
      poisson[i] -= std::exp(2.0 * y[0][i] / n) - 1.0;
    }
    row.poisson_residual = poisson.max_abs();

    const bool bound_ok =
        row.w_norm <= row.bound * (1.0 + kCertificateBoundSlack);
    const bool recon_ok =
        row.reconstruction_error <= kCertificateReconstructionTol;
    if (!(bound_ok && recon_ok) && !cert.first_violation) {
      cert.first_violation = cert.rows.size();
    }
    cert.max_reconstruction_error =
        std::max(cert.max_reconstruction_error, row.reconstruction_error);
    cert.max_poisson_residual =
        std::max(cert.max_poisson_residual, row.poisson_residual);
    if (row.bound > 0.0) {
      cert.max_bound_ratio =
          std::max(cert.max_bound_ratio, row.w_norm / row.bound);
    }
    cert.rows.push_back(row);
  };

  record(0.0);
  double t = 0.0;
  long next_row = 1;
  while (true) {
    const double target =
        std::min(static_cast<double>(next_row) * cfg.snapshot_every, cfg.t_end);
    double dt = scheme_dt(y[0], cfg);
    bool hit = false;
    if (t + dt >= target - 1e-12 * std::max(1.0, std::abs(target))) {
      dt = target - t;
      hit = true;
    }
    if (cfg.scheme == Scheme::ExplicitRk4) {
      stepper.rk4(system, y, dt);
    } else {
      stepper.semi_implicit(system, y, dt);
    }
    t = hit ? target : t + dt;
    check_overflow(y[0], cfg.divergence_threshold);
    if (!hit) continue;
    record(t);
    if (target >= cfg.t_end) break;
    ++next_row;
  }
  cert.passed = !cert.first_violation.has_value();
  return cert;
}

void require_pass(const C0Certificate& certificate) {
  if (certificate.rows.empty()) {
    throw Error(ErrorKind::CertificateFailed, "certificate has no rows");
  }
  if (!certificate.first_violation) return;
  const C0Row& row = certificate.rows[*certificate.first_violation];
  std::ostringstream msg;
  msg << "C0 certificate fails at t = " << row.t << ": ||w|| = " << row.w_norm
      << ", bound " << row.bound << ", reconstruction error "
      << row.reconstruction_error;
  throw Error(ErrorKind::CertificateFailed, msg.str());
}

SliceReport palais_smale_extract(const Trajectory& trajectory, double tol) {
  if (!trajectory.balanced) {
    throw Error(ErrorKind::NotBalanced,
                "slice extraction needs a run with an energy");
  }
  if (trajectory.rows.empty()) {
    throw Error(ErrorKind::EmptyReport, "trajectory has no rows");
  }
  SliceReport report;
  report.tol = tol;
  report.lambda = trajectory.lambda;
  report.min_energy = std::numeric_limits<double>::infinity();
  report.sup_scalar = -std::numeric_limits<double>::infinity();
  const double lambda2 = trajectory.lambda * trajectory.lambda;
  bool finite = true;
  for (const SeriesRow& row : trajectory.rows) {
    finite = finite && std::isfinite(row.energy);
    report.min_energy = std::min(report.min_energy, row.energy);
    report.sup_scalar = std::max(report.sup_scalar, row.s_max);
    report.max_identity_gap =
        std::max(report.max_identity_gap,
                 std::abs(row.weighted_scalar_sq - (lambda2 - row.dissipation)));
    if (std::abs(row.dissipation) <= tol) {
      report.slices.push_back(Slice{row.t, row.energy, row.dissipation,
                                    row.mass, row.weighted_scalar_sq,
                                    row.s_min, row.s_max});
    }
  }
  report.bounded_below_observed =
      finite && trajectory.status != RunStatus::Diverged &&
      std::abs(trajectory.rows.back().dissipation) <= tol;
  if (report.slices.empty()) {
    std::ostringstream msg;
    msg << "no snapshot has |dissipation| <= " << tol;
    throw Error(ErrorKind::EmptyReport, msg.str());
  }
  return report;
}

}  // namespace cyflow
