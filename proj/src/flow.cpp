#include "cyflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cyflow/error.hpp"
#include "cyflow/spectral.hpp"
#include "cyflow/variational.hpp"
#include "vecmath.hpp"

namespace cyflow {

namespace {

constexpr double kMinStep = 1e-12;
constexpr double kNormalizedTol = 1e-8;

}  // namespace

std::string_view to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::ExplicitRk4: return "explicit-rk4";
    case Scheme::SemiImplicit: return "semi-implicit";
  }
  return "explicit-rk4";
}

Scheme scheme_from_string(std::string_view name) {
  if (name == "explicit-rk4" || name == "rk4") return Scheme::ExplicitRk4;
  if (name == "semi-implicit") return Scheme::SemiImplicit;
  throw Error(ErrorKind::ConfigError,
              "unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(RunStatus status) noexcept {
  switch (status) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Stopped: return "stopped";
    case RunStatus::Diverged: return "diverged";
  }
  return "completed";
}

void StepperConfig::validate() const {
  if (!(dt_init > 0.0)) {
    throw Error(ErrorKind::ConfigError, "dt_init must be positive");
  }
  if (!(t_end > 0.0)) {
    throw Error(ErrorKind::ConfigError, "t_end must be positive");
  }
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) {
    throw Error(ErrorKind::ConfigError, "cfl_safety must lie in (0, 1]");
  }
  if (!(snapshot_every > 0.0)) {
    throw Error(ErrorKind::ConfigError, "snapshot_every must be positive");
  }
  if (!(divergence_threshold > 0.0)) {
    throw Error(ErrorKind::ConfigError,
                "divergence_threshold must be positive");
  }
}

FlowState FlowState::make(ScalarField f, const Background& bg, double t,
                          double overflow_bound) {
  FlowState s{std::move(f), t, ScalarField(bg.grid_ptr()), 1.0, 0.0};
  s.S = chern_scalar(s.f, bg, overflow_bound);
  const double n = bg.complex_dim();
  ScalarField w = map(s.f, [n](double v) { return std::exp(2.0 * v / n); });
  s.mass = integrate(w);
  s.weighted_scalar = integrate(s.S * w);
  return s;
}

ScalarField rhs(const FlowState& state, const Background& bg) {
  const double n = bg.complex_dim();
  const double lambda = bg.lambda_total();
  ScalarField out(state.S.grid_ptr());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * n * (lambda - state.S[i]);
  }
  return out;
}

double cfl_dt(const ScalarField& f, double cfl_safety) {
  const auto& g = f.grid();
  const double n = g.complex_dim();
  const double max_diffusion = 0.5 * n * std::exp(-2.0 * f.min() / n);
  const double h = g.min_spacing();
  return cfl_safety * h * h / (2.0 * g.real_dim() * max_diffusion);
}

double scheme_dt(const ScalarField& f, const StepperConfig& cfg) {
  double dt = cfg.dt_init;
  if (cfg.scheme == Scheme::ExplicitRk4) {
    dt = std::min(dt, cfl_dt(f, cfg.cfl_safety));
  }
  if (!(dt >= kMinStep)) {
    std::ostringstream msg;
    msg << "time step " << dt << " fell below " << kMinStep;
    throw Error(ErrorKind::StepTooSmall, msg.str());
  }
  return dt;
}

FlowSystem::FlowSystem(const Background& bg, bool dealias)
    : bg_(bg),
      dealias_(dealias),
      ws_(bg.grid()),
      lap_(bg.grid_ptr()),
      tmp_(bg.grid_ptr()) {}

void FlowSystem::chern_laplacian_into(const ScalarField& in,
                                      ScalarField& out) {
  ws_.laplacian(in.data(), out.data());
  if (bg_.balanced()) return;
  const std::size_t n = in.size();
  for (int a = 0; a < bg_.grid().real_dim(); ++a) {
    ws_.derivative(in.data(), a, tmp_.data());
    const auto& theta = bg_.torsion().components[a];
    for (std::size_t i = 0; i < n; ++i) out[i] -= theta[i] * tmp_[i];
  }
}

void FlowSystem::evaluate(std::span<const ScalarField> y,
                          std::span<ScalarField> dydt) {
  const ScalarField& f = y[0];
  ScalarField& out = dydt[0];
  chern_laplacian_into(f, lap_);
  const double n = bg_.complex_dim();
  const double half_n = 0.5 * n;
  const double lambda = bg_.lambda_total();
  const double* s = bg_.s_base().data();
  const double* fv = f.data();
  const double* lap = lap_.data();
  double* o = out.data();
  detail::exp_scaled(fv, -2.0 / n, o, f.size());
  for (std::size_t i = 0, m = f.size(); i < m; ++i) {
    o[i] = half_n * (lambda - o[i] * (s[i] - lap[i]));
  }
  if (dealias_) {
    ws_.dealias(out.data(), tmp_.data());
    std::swap(out, tmp_);
  }
}

double FlowSystem::implicit_coefficient(std::span<const ScalarField> y,
                                        std::size_t /*component*/) {
  const double n = bg_.complex_dim();
  return 0.5 * n * std::exp(-2.0 * y[0].min() / n);
}

FlowState step(const FlowState& state, const Background& bg,
               const StepperConfig& cfg) {
  return step(state, bg, cfg, scheme_dt(state.f, cfg));
}

FlowState step(const FlowState& state, const Background& bg,
               const StepperConfig& cfg, double dt) {
  FlowSystem system(bg, cfg.dealias);
  SystemStepper stepper(state.f.grid_ptr(), 1);
  std::vector<ScalarField> y{state.f};
  if (cfg.scheme == Scheme::ExplicitRk4) {
    stepper.rk4(system, y, dt);
  } else {
    stepper.semi_implicit(system, y, dt);
  }
  check_overflow(y[0], cfg.divergence_threshold);
  if (cfg.renormalize_mass) y[0] = normalize_conformal(y[0]);
  return FlowState::make(std::move(y[0]), bg, state.t + dt,
                         cfg.divergence_threshold);
}

SeriesRow sample_row(const FlowState& state, const Background& bg, double dt) {
  SeriesRow row;
  row.t = state.t;
  row.mass = state.mass;
  row.weighted_scalar = state.weighted_scalar;
  row.s_min = state.S.min();
  row.s_max = state.S.max();
  row.dt = dt;
  const double n = bg.complex_dim();
  const double lambda = bg.lambda_total();
  ScalarField sq(state.f.grid_ptr());
  ScalarField dev(state.f.grid_ptr());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double w = std::exp(2.0 * state.f[i] / n);
    const double s = state.S[i];
    sq[i] = s * s * w;
    dev[i] = (s - lambda) * (s - lambda) * w;
    row.s_deviation = std::max(row.s_deviation, std::abs(s - lambda));
  }
  row.weighted_scalar_sq = integrate(sq);
  if (bg.balanced()) {
    row.energy = energy(state.f, bg);
    row.dissipation = -integrate(dev);
  } else {
    row.energy = std::numeric_limits<double>::quiet_NaN();
    row.dissipation = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

double Trajectory::max_mass_drift() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, std::abs(r.mass - 1.0));
  return m;
}

double Trajectory::max_weighted_scalar_drift() const {
  double m = 0.0;
  for (const auto& r : rows) {
    m = std::max(m, std::abs(r.weighted_scalar - lambda));
  }
  return m;
}

double Trajectory::min_scalar() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) m = std::min(m, r.s_min);
  return m;
}

double Trajectory::max_scalar() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows) m = std::max(m, r.s_max);
  return m;
}

Trajectory run(const FlowState& state0, const Background& bg,
               const StepperConfig& cfg, const RunSinks& sinks) {
  cfg.validate();
  require_same_grid(state0.f.grid(), bg.grid());
  if (std::abs(state0.mass - 1.0) > kNormalizedTol) {
    std::ostringstream msg;
    msg << "initial datum is not normalized (mass " << state0.mass << ")";
    throw Error(ErrorKind::NotNormalized, msg.str());
  }

  Trajectory traj{{}, state0, RunStatus::Completed, std::nullopt, {}, 0,
                  bg.lambda_total(), bg.balanced()};
  FlowSystem system(bg, cfg.dealias);
  SystemStepper stepper(state0.f.grid_ptr(), 1);
  std::vector<ScalarField> y{state0.f};

  const double t0 = state0.t;
  double t = t0;
  double last_dt = scheme_dt(y[0], cfg);

  auto emit = [&](const FlowState& s) {
    SeriesRow row = sample_row(s, bg, last_dt);
    traj.rows.push_back(row);
    if (sinks.on_row) sinks.on_row(row);
    if (sinks.on_snapshot) sinks.on_snapshot(s);
    return sinks.stop_when && sinks.stop_when(s, row);
  };

  if (emit(state0)) {
    traj.status = RunStatus::Stopped;
    return traj;
  }

  const double t_final = t0 + cfg.t_end;
  long next_row = 1;
  while (true) {
    const double target =
        std::min(t0 + static_cast<double>(next_row) * cfg.snapshot_every,
                 t_final);
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
    ++traj.steps;
    last_dt = dt;
    t = hit ? target : t + dt;
    try {
      check_overflow(y[0], cfg.divergence_threshold);
    } catch (const Error& e) {
      traj.status = RunStatus::Diverged;
      traj.blowup_time = t;
      traj.divergence_message = e.what();
      return traj;
    }
    if (cfg.renormalize_mass) y[0] = normalize_conformal(y[0]);
    if (sinks.on_step) sinks.on_step(t, y[0]);
    if (!hit) continue;

    FlowState s = FlowState::make(y[0], bg, t, cfg.divergence_threshold);
    const bool stop = emit(s);
    traj.final_state = std::move(s);
    if (stop) {
      traj.status = RunStatus::Stopped;
      return traj;
    }
    if (target >= t_final) break;
    ++next_row;
  }
  return traj;
}

double scalar_evolution_residual(const FlowState& state, const Background& bg,
                                 double dt_probe, double cfl_safety) {
  if (!(dt_probe > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "dt_probe must be positive");
  }
  FlowSystem system(bg, false);
  SystemStepper stepper(state.f.grid_ptr(), 1);
  std::vector<ScalarField> y{state.f};
  auto advance = [&](double span) {
    const double limit = cfl_dt(y[0], cfl_safety);
    const auto substeps =
        static_cast<long>(std::max(1.0, std::ceil(span / limit)));
    const double h = span / static_cast<double>(substeps);
    for (long k = 0; k < substeps; ++k) stepper.rk4(system, y, h);
  };
  advance(dt_probe);
  const ScalarField f_mid = y[0];
  advance(dt_probe);
  const ScalarField f_end = y[0];

  const ScalarField s_start = chern_scalar(state.f, bg);
  const ScalarField s_mid = chern_scalar(f_mid, bg);
  const ScalarField s_end = chern_scalar(f_end, bg);
  const ScalarField lap_s = chern_laplacian(s_mid, bg);

  const double n = bg.complex_dim();
  const double lambda = bg.lambda_total();
  double worst = 0.0;
  for (std::size_t i = 0; i < s_mid.size(); ++i) {
    const double dsdt = (s_end[i] - s_start[i]) / (2.0 * dt_probe);
    const double predicted =
        0.5 * n * std::exp(-2.0 * f_mid[i] / n) * lap_s[i] +
        s_mid[i] * (s_mid[i] - lambda);
    worst = std::max(worst, std::abs(dsdt - predicted));
  }
  return worst;
}

LowerBoundReport lower_bound_check(const Trajectory& trajectory) {
  if (trajectory.rows.empty()) {
    throw Error(ErrorKind::InvalidArgument, "trajectory has no rows");
  }
  const auto& first = trajectory.rows.front();
  LowerBoundReport report;
  report.s0_min = first.s_min;
  report.floor = std::min(first.s_min, 0.0);
  report.tol =
      1e-8 * (1.0 + std::max(std::abs(first.s_min), std::abs(first.s_max)));
  const double t0 = first.t;
  for (const auto& row : trajectory.rows) {
    const double refined =
        report.s0_min * std::exp(-trajectory.lambda * (row.t - t0));
    const double bound = std::max(report.floor, refined);
    if (row.s_min < report.floor - report.tol ||
        row.s_min < refined - report.tol) {
      report.violations.push_back({row.t, row.s_min, bound});
    }
  }
  return report;
}

}  // namespace cyflow
