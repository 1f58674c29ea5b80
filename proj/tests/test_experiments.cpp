#include <doctest.h>

#include <random>

#include "cyflow/error.hpp"
#include "cyflow/experiments.hpp"
#include "cyflow/spectral.hpp"
#include "helpers.hpp"

using namespace cyflow;
using namespace testing;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

Background acceptance_background(const GridPtr& g) {
  return Background(sample(g, [](auto x) {
    return -1.0 + 0.5 * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
  }));
}

ScalarField sine_datum(const GridPtr& g) {
  return normalize_conformal(sample(g, [](auto x) { return 0.3 * std::sin(kTwoPi * x[0]); }));
}

// Midpoint rule on an m x m grid of the unit square for a radial profile in 2D.
struct PlanarQuadrature {
  double mass = 0.0;
  double mean = 0.0;
};

PlanarQuadrature planar(const BumpProfile& p, int m) {
  PlanarQuadrature q;
  const double w = 1.0 / (static_cast<double>(m) * m);
  for (int i = 0; i < m; ++i) {
    const double x = (i + 0.5) / m - p.center[0];
    const double dx = std::min(std::abs(x), 1.0 - std::abs(x));
    for (int j = 0; j < m; ++j) {
      const double y = (j + 0.5) / m - p.center[1];
      const double dy = std::min(std::abs(y), 1.0 - std::abs(y));
      const double f = p.value_at(std::hypot(dx, dy));
      q.mass += std::exp(2.0 * f) * w;
      q.mean += f * w;
    }
  }
  return q;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(unit_ball_volume(2) == doctest::Approx(kPi * kPi / 2).epsilon(1e-15));
  CHECK(unit_ball_volume(3) == doctest::Approx(kPi * kPi * kPi / 6).epsilon(1e-15));
}

TEST_CASE("bump profile shape") {
  BumpProfile p{.r = 0.1, .c_r = 2.0, .center = {0.5, 0.5}, .n = 1, .outer_value = std::log(0.1)};
  CHECK(p.value_at(0.0) == 2.0);
  CHECK(p.value_at(0.1) == doctest::Approx(2.0));
  CHECK(p.value_at(0.2) == doctest::Approx(std::log(0.1)));
  CHECK(p.value_at(0.3) == std::log(0.1));
  CHECK(p.value_at(0.15) == doctest::Approx(0.5 * (2.0 + std::log(0.1))));
  CHECK(p.annulus_slope() == doctest::Approx((2.0 - std::log(0.1)) / 0.1));
  BumpProfile q{.r = 0.125, .c_r = 0.0, .center = {}, .n = 2, .outer_value = std::log(0.125)};
  CHECK(q.c_bound() == doctest::Approx(-4.0 * std::log(0.125) - std::log(kPi * kPi / 2)));
}

TEST_CASE("radial oracle against planar quadrature") {
  BumpProfile p{.r = 0.1, .c_r = 1.0, .center = {0.5, 0.5}, .n = 1, .outer_value = std::log(0.1)};
  const auto oracle = radial_integrals(p, {1.0, 1.0});
  const auto q = planar(p, 3000);
  CHECK(oracle.mass == doctest::Approx(q.mass).epsilon(2e-5));
  CHECK(oracle.mean == doctest::Approx(q.mean).epsilon(2e-5));
  const double annulus = kPi * (4.0 - 1.0) * 0.01;
  CHECK(oracle.dirichlet ==
        doctest::Approx(0.5 * p.annulus_slope() * p.annulus_slope() * annulus).epsilon(1e-12));
}

TEST_CASE("bump normalization") {
  const std::vector<double> per{1.0, 1.0, 1.0, 1.0};
  const std::vector<double> c{0.5, 0.5, 0.5, 0.5};
  double previous = -1e300;
  for (double r : {0.2, 0.125, 0.0625, 1.0 / 64, 1.0 / 256, 1.0 / 1024}) {
    CAPTURE(r);
    const auto p = solve_bump(r, c, 2, per);
    CHECK(std::abs(radial_integrals(p, per).mass - 1.0) <= 1e-10);
    CHECK(p.c_r <= p.c_bound());
    CHECK(p.c_r > previous);  // c_r decreases as r grows
    previous = p.c_r;
  }
  const auto p8 = solve_bump(0.125, c, 2, per);
  CHECK(p8.c_r <= -4.0 * std::log(0.125) - std::log(kPi * kPi / 2));

  // Mass is strictly increasing in the plateau value.
  auto p = p8;
  double last = 0.0;
  for (double dc : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0}) {
    p.c_r = p8.c_r + dc;
    const double m = radial_integrals(p, per).mass;
    CHECK(m > last);
    last = m;
  }

  CHECK(kind_of([&] { solve_bump(0.3, c, 2, per); }) == ErrorKind::BumpDoesNotFit);
  CHECK(kind_of([&] { solve_bump(0.0, c, 2, per); }) == ErrorKind::BumpDoesNotFit);
  CHECK(kind_of([&] { solve_bump(0.2, c, 2, {1.0, 1.0, 0.7, 1.0}); }) == ErrorKind::BumpDoesNotFit);
}

TEST_CASE("periodic distance wraps") {
  const std::vector<double> per{1.0, 2.0};
  const double x[2] = {0.95, 1.9};
  CHECK(periodic_distance(x, {0.05, 0.1}, per) == doctest::Approx(std::hypot(0.1, 0.2)));
}

TEST_CASE("bump field on a grid") {
  const auto g = make_unit_grid(1, 128);
  const auto bg = Background::constant(g, 1.0);
  const auto center = default_center(*g);
  CHECK(center[0] == 0.5);
  const auto bump = bump_family(0.1, center, bg);
  CHECK(bump.grid_mass == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(bump.field.max() == doctest::Approx(bump.profile.c_r));
  CHECK(bump.field.min() == doctest::Approx(std::log(0.1)));
  const auto oracle = radial_integrals(bump.profile, {1.0, 1.0});
  CHECK(bump_energy_grid(bump, bg) ==
        doctest::Approx(oracle.dirichlet + oracle.mean).epsilon(2e-2));
  CHECK(kind_of([&] { bump_family(0.02, center, bg); }) == ErrorKind::ResolutionTooCoarse);
}

TEST_CASE("unboundedness sweep on the radial oracle") {
  const auto g = make_unit_grid(2, 8);
  const auto bg = Background::constant(g, 1.0);
  std::vector<double> rs;
  for (int k = 3; k <= 10; ++k) rs.push_back(std::ldexp(1.0, -k));
  const auto table = unboundedness_sweep(rs, bg);
  REQUIRE(table.rows.size() == rs.size());
  CHECK(table.constant_s_base);
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const auto& row = table.rows[k];
    CHECK_FALSE(row.grid_resolved);
    CHECK(std::isnan(row.grid_energy));
    CHECK(std::abs(row.oracle_mass - 1.0) <= 1e-10);
    CHECK(row.c_r <= row.c_bound);
    CHECK(row.reference == doctest::Approx(0.5 * std::log(rs[k])));
    if (k > 0) CHECK(row.oracle_energy < table.rows[k - 1].oracle_energy);
  }
  CHECK(table.rows.back().oracle_energy < -2.0);
}

TEST_CASE("unboundedness sweep preconditions") {
  CHECK(kind_of([] {
          const auto g = make_unit_grid(1, 16);
          unboundedness_sweep({0.1}, Background::constant(g, 1.0));
        }) == ErrorKind::InvalidBackground);
  CHECK(kind_of([] {
          const auto g = make_unit_grid(2, 8);
          unboundedness_sweep({0.1}, Background::constant(g, -1.0));
        }) == ErrorKind::InvalidBackground);
  CHECK(kind_of([] {
          const auto g = make_unit_grid(2, 8);
          unboundedness_sweep({0.3}, Background::constant(g, 1.0));
        }) == ErrorKind::BumpDoesNotFit);
}

TEST_CASE("saddle experiment") {
  const auto g = make_unit_grid(1, 32);
  const auto bg = Background::constant(g, 4.0 * kPi * kPi);

  SUBCASE("perturbed start descends") {
    const auto rep = saddle_experiment(bg);
    CHECK(rep.hessian.min_eigenvalue == doctest::Approx(-4.0 * kPi * kPi).epsilon(1e-2));
    CHECK(rep.first_eigenvalue == doctest::Approx(4.0 * kPi * kPi));
    CHECK(rep.energy_strictly_decreasing);
    REQUIRE(rep.target_time.has_value());
    CHECK(rep.trajectory.rows.back().energy < -0.1);
    CHECK(rep.final_distance > rep.initial_distance);
    CHECK_FALSE(rep.returned_to_nonnegative_energy);
  }
  SUBCASE("unperturbed start is stationary") {
    SaddleOptions opt;
    opt.amplitude = 0.0;
    opt.stepper.t_end = 0.05;
    const auto rep = saddle_experiment(bg, opt);
    CHECK(rep.max_step_change <= 1e-12);
    CHECK_FALSE(rep.target_time.has_value());
    CHECK(rep.trajectory.final_state.f.max_abs() <= 1e-12);
  }
  SUBCASE("stable background is rejected") {
    CHECK(kind_of([&] { saddle_experiment(Background::constant(g, kPi * kPi)); }) ==
          ErrorKind::NotUnstable);
    CHECK(kind_of([&] { saddle_experiment(acceptance_background(g)); }) ==
          ErrorKind::InvalidBackground);
  }
}

TEST_CASE("c0 certificate") {
  const auto g = make_unit_grid(1, 16);
  const auto bg = acceptance_background(g);
  StepperConfig cfg;
  cfg.t_end = 0.3;
  cfg.snapshot_every = 0.01;

  SUBCASE("canonical datum starts from w = lambda v0") {
    const auto h = canonical_initial(bg);
    const auto cert = c0_certificate(h, bg, cfg);
    CHECK(max_abs_diff(cert.h, h) <= 1e-12);
    CHECK(cert.K == doctest::Approx((cert.v0 * bg.lambda_total()).max_abs()).epsilon(1e-12));
    CHECK(cert.rows.front().reconstruction_error <= 1e-12);
  }
  SUBCASE("convergent run passes") {
    const auto cert = c0_certificate(sine_datum(g), bg, cfg);
    CHECK(cert.passed);
    CHECK_FALSE(cert.first_violation.has_value());
    CHECK(cert.rows.size() == 31);
    CHECK(cert.max_reconstruction_error <= 1e-10);
    CHECK(cert.max_poisson_residual <= 1e-8);
    CHECK(cert.max_bound_ratio <= 1.0 + kCertificateBoundSlack);
    CHECK_NOTHROW(require_pass(cert));

    auto doctored = cert;
    doctored.passed = false;
    doctored.first_violation = 3;
    CHECK(kind_of([&] { require_pass(doctored); }) == ErrorKind::CertificateFailed);
  }
  SUBCASE("stationary solution reconstructs exactly") {
    StepperConfig long_cfg = cfg;
    long_cfg.t_end = 5.0;
    RunSinks sinks;
    sinks.stop_when = [](const FlowState&, const SeriesRow& r) { return r.s_deviation <= 1e-11; };
    const auto traj = run(FlowState::make(sine_datum(g), bg), bg, long_cfg, sinks);
    REQUIRE(traj.status == RunStatus::Stopped);
    const auto cert = c0_certificate(traj.final_state.f, bg, cfg);
    CHECK(cert.max_reconstruction_error <= 1e-10);
    CHECK(cert.passed);
  }
  SUBCASE("reconstruction error shrinks with the step") {
    StepperConfig semi = cfg;
    semi.scheme = Scheme::SemiImplicit;
    semi.t_end = 0.1;
    semi.dt_init = 2e-3;
    const double e1 = c0_certificate(sine_datum(g), bg, semi).max_reconstruction_error;
    semi.dt_init = 1e-3;
    const double e2 = c0_certificate(sine_datum(g), bg, semi).max_reconstruction_error;
    MESSAGE("semi-implicit reconstruction errors " << e1 << " " << e2);
    CHECK(e2 < e1);
  }
}

TEST_CASE("slice extraction") {
  const auto g = make_unit_grid(1, 16);
  StepperConfig cfg;
  cfg.t_end = 2.0;
  cfg.snapshot_every = 0.05;

  SUBCASE("stationary run: every row is a slice") {
    const auto bg = Background::constant(g, -1.0);
    const auto traj = run(FlowState::make(ScalarField(g, 0.0), bg), bg, cfg);
    const auto rep = palais_smale_extract(traj, 1e-8);
    CHECK(rep.slices.size() == traj.rows.size());
    for (const auto& s : rep.slices) CHECK(s.dissipation == 0.0);
    CHECK(rep.bounded_below_observed);
  }
  SUBCASE("convergent run") {
    const auto bg = acceptance_background(g);
    const auto traj = run(FlowState::make(sine_datum(g), bg), bg, cfg);
    const auto rep = palais_smale_extract(traj, 1e-8);
    REQUIRE_FALSE(rep.slices.empty());
    CHECK(rep.slices.front().t > 0.0);
    for (const auto& s : rep.slices) {
      CHECK(std::abs(s.dissipation) <= 1e-8);
      CHECK(std::abs(s.weighted_scalar_sq - 1.0) <= 1e-6);
      CHECK(std::abs(s.mass - 1.0) <= 1e-6);
    }
    CHECK(rep.max_identity_gap <= 1e-8);
    CHECK(rep.bounded_below_observed);
    CHECK(rep.sup_scalar == doctest::Approx(traj.max_scalar()));
  }
  SUBCASE("errors") {
    const auto bg = acceptance_background(g);
    StepperConfig short_cfg = cfg;
    short_cfg.t_end = 0.05;
    short_cfg.snapshot_every = 0.01;
    const auto traj = run(FlowState::make(sine_datum(g), bg), bg, short_cfg);
    CHECK(kind_of([&] { palais_smale_extract(traj, 1e-12); }) == ErrorKind::EmptyReport);

    auto theta = CovectorField::zero(g);
    theta.components[0] = sample(g, [](auto x) { return std::sin(kTwoPi * x[1]); });
    const Background tw(bg.s_base(), theta);
    const auto ttraj = run(FlowState::make(sine_datum(g), tw), tw, short_cfg);
    CHECK(kind_of([&] { palais_smale_extract(ttraj, 1e-8); }) == ErrorKind::NotBalanced);
  }
}

}  // TEST_SUITE
