// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Every tolerance is pinned below; runs are fixed so the output is reproducible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cyflow/error.hpp"
#include "cyflow/experiments.hpp"
#include "cyflow/flow.hpp"
#include "cyflow/geometry.hpp"
#include "cyflow/spectral.hpp"
#include "cyflow/variational.hpp"

using namespace cyflow;

namespace {

constexpr double kPi = std::numbers::pi;

// Run #1.
constexpr int kRun1Points = 128;
constexpr double kRun1Horizon = 5.0;
constexpr double kRun1Extended = 20.0;
constexpr double kRun1Cadence = 1e-3;
constexpr double kCflSafety = 0.5;

// 1. Conservation.
constexpr double kMassTol = 1e-6;
constexpr double kWeightedTol = 1e-6;
// 2. Monotonicity. Rows with |dissipation| below the floor are excluded from
// the relative comparison (F differences there are at rounding level).
constexpr double kMonotoneSlack = 1e-10;
constexpr double kDerivativeRelTol = 1e-3;
constexpr double kDissipationFloor = 1e-6;
// 3. Convergence.
constexpr double kSteadyTol = 1e-6;
constexpr double kUniquenessTol = 1e-5;
constexpr double kSecondDatumStop = 1e-9;
// 4. Lower bound.
constexpr double kLowerBoundTol = 1e-8;  // applied inside lower_bound_check
constexpr int kCanonicalPoints = 64;
constexpr double kCanonicalHorizon = 5.0;
// 5. Scalar evolution.
constexpr double kResidualTol = 1e-6;
constexpr double kProbe = 1e-4;
constexpr double kProbeRateMin = 3.0;  // dt^2 predicts 4 per halving
constexpr double kProbeRateMax = 5.0;
// 6. Second variation.
constexpr double kSecondVariationRelTol = 1e-10;
constexpr double kFiniteDifferenceRelTol = 1e-4;
constexpr double kFiniteDifferenceEps = 1e-3;
// 7. Stability.
constexpr double kEigenRelTol = 1e-2;
// 8. Saddle.
constexpr double kSaddleAmplitude = 1e-3;
constexpr double kSaddleTarget = -0.1;
constexpr double kStationaryStep = 1e-12;
// 9. Unboundedness.
constexpr double kDeepEnergy = -2.0;
constexpr double kRatioTol = 0.05;
constexpr double kGridOracleTol = 0.01;
constexpr int kSweepPoints = 32;
// 10. C0 certificate.
constexpr double kBoundSlack = 1e-6;
constexpr double kReconstructionTol = 1e-5;
constexpr double kPoissonTol = 1e-5;
constexpr double kCertificateCadence = 1e-2;
// 11. Slices.
constexpr double kSliceTol = 1e-8;
constexpr double kSliceScalarTol = 1e-6;
constexpr double kSliceMassTol = 1e-6;
constexpr double kIdentityTol = 1e-8;
// 12. Spectral invariants.
constexpr int kRandomFields = 100;
constexpr double kZeroMeanTol = 1e-12;
constexpr double kAdjointTol = 1e-10;
constexpr double kIbpTol = 1e-10;

int failures = 0;

void verdict(int id, const char* name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s [%2d] %-22s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void progress(const char* what) {
  static const auto start = std::chrono::steady_clock::now();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "[%7.1fs] %s\n", s, what);
}

Background run1_background(const GridPtr& g) {
  return Background(ScalarField::from_function(g, [](std::span<const double> x) {
    return -1.0 + 0.5 * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]);
  }));
}

ScalarField normalized_mode(const GridPtr& g, int axis, bool sine) {
  return normalize_conformal(ScalarField::from_function(g, [=](std::span<const double> x) {
    const double a = 2 * kPi * x[static_cast<std::size_t>(axis)];
    return 0.3 * (sine ? std::sin(a) : std::cos(a));
  }));
}

void criterion_12() {
  std::mt19937_64 rng(12);
  const auto g2 = make_unit_grid(1, 64);
  const auto g4 = make_unit_grid(2, 12);
  double mean = 0.0;
  double adj = 0.0;
  double ibp = 0.0;
  for (int k = 0; k < kRandomFields; ++k) {
    const auto& g = k % 5 == 4 ? g4 : g2;
    const auto phi = random_band_limited(g, 5, rng);
    const auto psi = random_band_limited(g, 5, rng);
    const auto lphi = laplacian(phi);
    const auto lpsi = laplacian(psi);
    mean = std::max(mean, std::abs(integrate(lphi)));
    adj = std::max(adj, std::abs(integrate(phi * lpsi) - integrate(psi * lphi)));
    ibp = std::max(ibp, std::abs(integrate(pairing(gradient(phi), gradient(psi))) +
                                 integrate(phi * lpsi)));
  }
  verdict(12, "spectral invariants",
          mean <= kZeroMeanTol && adj <= kAdjointTol && ibp <= kIbpTol,
          fmt("fields=%d max|int lap|=%.2e (<=%.0e) self-adjoint=%.2e (<=%.0e) "
              "by-parts=%.2e (<=%.0e)",
              kRandomFields, mean, kZeroMeanTol, adj, kAdjointTol, ibp, kIbpTol));
}

void criterion_6() {
  const auto g = make_unit_grid(1, 64);
  const ScalarField zero(g, 0.0);
  const auto u = ScalarField::from_function(
      g, [](std::span<const double> x) { return std::cos(2 * kPi * x[0]); });
  double worst_closed = 0.0;
  double worst_fd = 0.0;
  for (double lam : {-1.0, 3.0, kPi * kPi, 4 * kPi * kPi}) {
    const auto bg = Background::constant(g, lam);
    const double exact = 2 * kPi * kPi - lam;
    const double sv = second_variation(zero, u, u, bg);
    worst_closed = std::max(worst_closed, std::abs(sv - exact) / std::abs(exact));
    auto second = [&](double e) {
      return (augmented_energy(u * e, bg) - 2 * augmented_energy(zero, bg) +
              augmented_energy(u * -e, bg)) / (e * e);
    };
    const double rich =
        (4 * second(kFiniteDifferenceEps / 2) - second(kFiniteDifferenceEps)) / 3;
    worst_fd = std::max(worst_fd, std::abs(rich - sv) / std::abs(sv));
  }
  verdict(6, "second variation",
          worst_closed <= kSecondVariationRelTol && worst_fd <= kFiniteDifferenceRelTol,
          fmt("closed-form rel=%.2e (<=%.0e) Richardson FD rel=%.2e (<=%.0e)", worst_closed,
              kSecondVariationRelTol, worst_fd, kFiniteDifferenceRelTol));
}

void criterion_7() {
  const auto g = make_unit_grid(1, 32);
  const ScalarField zero(g, 0.0);
  const auto hi = hessian_min_eigen(zero, Background::constant(g, 4 * kPi * kPi), 1e-10);
  const auto lo = hessian_min_eigen(zero, Background::constant(g, kPi * kPi), 1e-10);
  const double e_hi = std::abs(hi.min_eigenvalue + 4 * kPi * kPi) / (4 * kPi * kPi);
  const double e_lo = std::abs(lo.min_eigenvalue - 2 * kPi * kPi) / (2 * kPi * kPi);
  const bool pass = e_hi <= kEigenRelTol && hi.classification == Classification::Saddle &&
                    e_lo <= kEigenRelTol &&
                    lo.classification == Classification::LocalMinCandidate;
  verdict(7, "stability criterion", pass,
          fmt("lambda=4pi^2: %.6f (%s, rel %.1e); lambda=pi^2: %.6f (%s, rel %.1e)",
              hi.min_eigenvalue, std::string(to_string(hi.classification)).c_str(), e_hi,
              lo.min_eigenvalue, std::string(to_string(lo.classification)).c_str(), e_lo));
}

void criterion_8() {
  const auto g = make_unit_grid(1, 32);
  const auto bg = Background::constant(g, 4 * kPi * kPi);
  SaddleOptions opt;
  opt.amplitude = kSaddleAmplitude;
  opt.energy_target = kSaddleTarget;
  const auto moved = saddle_experiment(bg, opt);
  opt.amplitude = 0.0;
  const auto still = saddle_experiment(bg, opt);
  const double f_last = moved.trajectory.rows.back().energy;
  const bool pass = moved.energy_strictly_decreasing && moved.target_time.has_value() &&
                    f_last < kSaddleTarget && still.max_step_change <= kStationaryStep;
  verdict(8, "saddle dynamics", pass,
          fmt("amp=1e-3: strictly decreasing=%s, F=%.4f at t=%.3f; amp=0: max step change "
              "%.1e over t=%.2f (<=%.0e)",
              moved.energy_strictly_decreasing ? "yes" : "no", f_last,
              moved.target_time.value_or(std::nan("")), still.max_step_change,
              still.trajectory.final_state.t, kStationaryStep));
}

void criterion_9() {
  const auto g = make_unit_grid(2, kSweepPoints);
  const auto bg = Background::constant(g, 1.0);
  std::vector<double> rs;
  for (int k = 3; k <= 10; ++k) rs.push_back(std::ldexp(1.0, -k));
  const auto table = unboundedness_sweep(rs, bg);
  bool decreasing = true;
  bool bound = true;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& row = table.rows[k];
    std::fprintf(stderr, "  r=2^-%zu c_r=%.6f bound=%.6f F=%.6f ratio=%.4f grid=%.6f\n", k + 3,
                 row.c_r, row.c_bound, row.oracle_energy, row.ratio, row.grid_energy);
    if (row.c_r > row.c_bound) bound = false;
    if (k > 0 && !(row.oracle_energy < table.rows[k - 1].oracle_energy)) decreasing = false;
  }
  const auto& last = table.rows.back();
  const auto& first = table.rows.front();
  const double ratio_err = std::abs(last.ratio - 1.0);
  const double grid_err =
      first.grid_resolved ? std::abs(first.grid_energy - first.oracle_energy) /
                                std::abs(first.oracle_energy)
                          : std::nan("");
  const bool pass = decreasing && last.oracle_energy < kDeepEnergy && ratio_err <= kRatioTol &&
                    bound && grid_err <= kGridOracleTol;
  verdict(9, "unboundedness", pass,
          fmt("decreasing=%s F(2^-10)=%.4f (<%.0f) ratio=%.4f (|r-1|<=%.2f) c_r bound=%s "
              "grid vs oracle at 1/8: %.2e (<=%.0e)",
              decreasing ? "yes" : "no", last.oracle_energy, kDeepEnergy, last.ratio, kRatioTol,
              bound ? "holds" : "violated", grid_err, kGridOracleTol));
}

void criterion_5(const FlowState& s0, const Background& bg) {
  const double r0 = scalar_evolution_residual(s0, bg, kProbe, kCflSafety);
  const double r_coarse = scalar_evolution_residual(s0, bg, 2 * kProbe, kCflSafety);
  const double r_fine = scalar_evolution_residual(s0, bg, kProbe / 2, kCflSafety);
  const double rate1 = r_coarse / r0;
  const double rate2 = r0 / r_fine;
  const bool quadratic = rate1 >= kProbeRateMin && rate1 <= kProbeRateMax &&
                         rate2 >= kProbeRateMin && rate2 <= kProbeRateMax;
  verdict(5, "scalar evolution", r0 <= kResidualTol && quadratic,
          fmt("residual(1e-4)=%.3e (<=%.0e); halving ratios %.3f, %.3f (dt^2 -> 4)", r0,
              kResidualTol, rate1, rate2));
}

}  // namespace

int main() {
  std::printf("acceptance: Chern-Yamabe flow suite, 12 criteria\n");
  std::fflush(stdout);
  try {
    progress("spectral invariants");
    criterion_12();
    progress("second variation");
    criterion_6();
    progress("hessian");
    criterion_7();
    progress("saddle");
    criterion_8();
    progress("sweep");
    criterion_9();

    const auto g1 = make_unit_grid(1, kRun1Points);
    const Background bg1 = run1_background(g1);
    const FlowState s0 = FlowState::make(normalized_mode(g1, 0, true), bg1);
    progress("scalar evolution residual");
    criterion_5(s0, bg1);

    // Canonical lambda > 0 run for the lower bound.
    progress("canonical run");
    const auto gc = make_unit_grid(1, kCanonicalPoints);
    const Background bgc(ScalarField::from_function(gc, [](std::span<const double> x) {
      return 1.0 + std::sin(2 * kPi * x[0]);
    }));
    StepperConfig ccfg;
    ccfg.cfl_safety = kCflSafety;
    ccfg.t_end = kCanonicalHorizon;
    ccfg.snapshot_every = 1e-2;
    const auto canon = run(FlowState::make(canonical_initial(bgc), bgc), bgc, ccfg);

    progress("run #1 to T = 20");
    StepperConfig cfg;
    cfg.cfl_safety = kCflSafety;
    cfg.t_end = kRun1Extended;
    cfg.snapshot_every = kRun1Cadence;
    const auto traj = run(s0, bg1, cfg);
    std::vector<SeriesRow> head;
    for (const auto& r : traj.rows) {
      if (r.t <= kRun1Horizon + 1e-9) head.push_back(r);
    }

    // 1.
    double mass = 0.0;
    double weighted = 0.0;
    for (const auto& r : head) {
      mass = std::max(mass, std::abs(r.mass - 1.0));
      weighted = std::max(weighted, std::abs(r.weighted_scalar + 1.0));
    }
    verdict(1, "conservation",
            traj.status == RunStatus::Completed && mass <= kMassTol && weighted <= kWeightedTol,
            fmt("rows=%zu over [0,%.0f]: max|mass-1|=%.2e (<=%.0e) max|wS+1|=%.2e (<=%.0e)",
                head.size(), kRun1Horizon, mass, kMassTol, weighted, kWeightedTol));

    // 2.
    double rise = -1e300;
    double worst_rel = 0.0;
    double worst_scaled = 0.0;
    std::size_t compared = 0;
    for (std::size_t j = 0; j + 1 < head.size(); ++j) {
      rise = std::max(rise, head[j + 1].energy - head[j].energy);
    }
    for (std::size_t j = 1; j + 1 < head.size(); ++j) {
      const double d = head[j].dissipation;
      if (std::abs(d) < kDissipationFloor) continue;
      const double central =
          (head[j + 1].energy - head[j - 1].energy) / (head[j + 1].t - head[j - 1].t);
      worst_rel = std::max(worst_rel, std::abs(central - d) / std::abs(d));
      // Diagnostic only: along this flow dF/dt equals (n/2) times the dissipation.
      worst_scaled = std::max(worst_scaled, std::abs(central - 0.5 * d) / std::abs(0.5 * d));
      ++compared;
    }
    verdict(2, "monotonicity",
            rise <= kMonotoneSlack && compared > 0 && worst_rel <= kDerivativeRelTol,
            fmt("max F rise=%.2e (<=%.0e); central dF/dt vs dissipation rel=%.3e (<=%.0e) on "
                "%zu rows; vs (n/2)*dissipation rel=%.3e",
                rise, kMonotoneSlack, worst_rel, kDerivativeRelTol, compared, worst_scaled));

    // 3.
    progress("second initial datum");
    StepperConfig cfg2 = cfg;
    cfg2.snapshot_every = 1e-2;
    RunSinks stop;
    stop.stop_when = [](const FlowState&, const SeriesRow& r) {
      return r.s_deviation <= kSecondDatumStop;
    };
    const auto traj2 = run(FlowState::make(normalized_mode(g1, 1, false), bg1), bg1, cfg2, stop);
    const double dev = traj.rows.back().s_deviation;
    const double gap = max_abs_diff(traj.final_state.f, traj2.final_state.f);
    verdict(3, "convergence",
            traj.status == RunStatus::Completed && dev <= kSteadyTol && gap <= kUniquenessTol,
            fmt("||S-lambda||_inf at t=%.0f: %.2e (<=%.0e); second datum stopped at t=%.2f, "
                "||f1-f2||_inf=%.2e (<=%.0e)",
                traj.final_state.t, dev, kSteadyTol, traj2.final_state.t, gap, kUniquenessTol));

    // 4.
    const auto lb1 = lower_bound_check(traj);
    const auto lbc = lower_bound_check(canon);
    const double canon_min = canon.min_scalar();
    verdict(4, "lower bound",
            lb1.ok() && lbc.ok() && canon.status == RunStatus::Completed && canon_min > 0.0,
            fmt("run #1 over [0,%.0f]: %zu violations (floor %.4f); canonical: %zu violations, "
                "min S=%.4f over [0,%.0f]",
                kRun1Extended,
                lb1.violations.size(), lb1.floor, lbc.violations.size(), canon_min,
                kCanonicalHorizon));

    // 11.
    const auto report = palais_smale_extract(traj, kSliceTol);
    double scalar_sq = 0.0;
    double slice_mass = 0.0;
    for (const auto& s : report.slices) {
      scalar_sq = std::max(scalar_sq, std::abs(s.weighted_scalar_sq - 1.0));
      slice_mass = std::max(slice_mass, std::abs(s.mass - 1.0));
    }
    verdict(11, "slice extraction",
            !report.slices.empty() && scalar_sq <= kSliceScalarTol &&
                slice_mass <= kSliceMassTol && report.max_identity_gap <= kIdentityTol,
            fmt("%zu slices from t=%.3f: max|intS^2e-1|=%.2e (<=%.0e) max|mass-1|=%.2e "
                "(<=%.0e); identity gap over %zu rows=%.2e (<=%.0e)",
                report.slices.size(), report.slices.front().t, scalar_sq, kSliceScalarTol,
                slice_mass, kSliceMassTol, traj.rows.size(), report.max_identity_gap,
                kIdentityTol));

    // 10.
    progress("C0 certificate over [0, 5]");
    StepperConfig ccert;
    ccert.cfl_safety = kCflSafety;
    ccert.t_end = kRun1Horizon;
    ccert.snapshot_every = kCertificateCadence;
    const auto cert = c0_certificate(s0.f, bg1, ccert);
    double ratio = 0.0;
    for (const auto& row : cert.rows) ratio = std::max(ratio, row.w_norm / row.bound);
    verdict(10, "C0 certificate",
            ratio <= 1.0 + kBoundSlack && cert.max_reconstruction_error <= kReconstructionTol &&
                cert.max_poisson_residual <= kPoissonTol,
            fmt("K=%.4f rows=%zu max ||w||/(K e^{-t})=%.8f (<=1+%.0e) reconstruction=%.2e "
                "(<=%.0e) Poisson residual=%.2e (<=%.0e)",
                cert.K, cert.rows.size(), ratio, kBoundSlack, cert.max_reconstruction_error,
                kReconstructionTol, cert.max_poisson_residual, kPoissonTol));
  } catch (const Error& e) {
    std::printf("FAIL acceptance aborted: %s: %s\n", std::string(to_string(e.kind())).c_str(),
                e.what());
    return 2;
  }
  progress("done");
  std::printf("acceptance: %d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
