#include "cyflow/variational.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "cyflow/error.hpp"
#include "cyflow/spectral.hpp"

namespace cyflow {

namespace {

ScalarField weight(const ScalarField& f) {
  const double n = f.grid().complex_dim();
  return map(f, [n](double v) { return std::exp(2.0 * v / n); });
}

// Second-variation operator u -> -lap(u) - (2 lambda / n) exp(2f/n) u,
// followed by the tangent projection.
class HessianOperator {
 public:
  HessianOperator(const ScalarField& f, const Background& bg)
      : w_(weight(f)),
        ws_(f.grid()),
        coupling_(2.0 * bg.lambda_total() / bg.complex_dim()),
        w_norm2_(inner(w_, w_)) {
    shift_ = std::max(1.0, std::abs(coupling_) * w_.max_abs());
  }

  [[nodiscard]] ScalarField project(ScalarField u) const {
    u.add_scaled(-inner(w_, u) / w_norm2_, w_);
    return u;
  }

  ScalarField apply(const ScalarField& u) {
    ScalarField out(u.grid_ptr());
    ws_.laplacian(u.data(), out.data());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = -out[i] - coupling_ * w_[i] * u[i];
    }
    return project(std::move(out));
  }

  ScalarField precondition(const ScalarField& r) {
    ScalarField out(r.grid_ptr());
    ws_.helmholtz_solve(r.data(), 1.0 / shift_, out.data());
    out *= 1.0 / shift_;
    return project(std::move(out));
  }

 private:
  ScalarField w_;
  SpectralWorkspace ws_;
  double coupling_;
  double w_norm2_;
  double shift_ = 1.0;
};

}  // namespace

std::string_view to_string(Classification c) noexcept {
  switch (c) {
    case Classification::LocalMinCandidate: return "local-min-candidate";
    case Classification::Saddle: return "saddle";
    case Classification::Degenerate: return "degenerate";
  }
  return "degenerate";
}

Classification classify(double min_eigenvalue) noexcept {
  if (min_eigenvalue < -kDegenerateTol) return Classification::Saddle;
  if (min_eigenvalue > kDegenerateTol) return Classification::LocalMinCandidate;
  return Classification::Degenerate;
}

void require_balanced(const Background& bg) {
  if (!bg.balanced()) {
    throw Error(ErrorKind::NotBalanced,
                "the energy functional needs a balanced background");
  }
}

double energy(const ScalarField& f, const Background& bg) {
  require_balanced(bg);
  require_same_grid(f.grid(), bg.grid());
  const auto df = gradient(f);
  return 0.5 * integrate(pairing(df, df)) + integrate(bg.s_base() * f);
}

double dissipation(const ScalarField& f, const Background& bg) {
  require_balanced(bg);
  const double n = bg.complex_dim();
  const double lambda = bg.lambda_total();
  const ScalarField s = chern_scalar(f, bg);
  ScalarField integrand(f.grid_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = s[i] - lambda;
    integrand[i] = d * d * std::exp(2.0 * f[i] / n);
  }
  return -integrate(integrand);
}

double augmented_energy(const ScalarField& f, const Background& bg) {
  const double n = bg.complex_dim();
  return energy(f, bg) -
         0.5 * n * bg.lambda_total() * (conformal_mass(f) - 1.0);
}

double tangent_defect(const ScalarField& f, const ScalarField& u) {
  return inner(weight(f), u);
}

ScalarField project_tangent(const ScalarField& f, const ScalarField& u) {
  const ScalarField w = weight(f);
  ScalarField out = u;
  out.add_scaled(-inner(w, u) / inner(w, w), w);
  return out;
}

double second_variation(const ScalarField& f, const ScalarField& u,
                        const ScalarField& v, const Background& bg) {
  require_balanced(bg);
  const ScalarField w = weight(f);
  for (const ScalarField* dir : {&u, &v}) {
    const double defect = inner(w, *dir);
    if (std::abs(defect) > kTangentTol) {
      std::ostringstream msg;
      msg << "direction is not tangent (weighted mean " << defect << ")";
      throw Error(ErrorKind::NotTangent, msg.str());
    }
  }
  const double n = bg.complex_dim();
  const double coupling = 2.0 * bg.lambda_total() / n;
  return integrate(pairing(gradient(u), gradient(v))) -
         coupling * integrate(w * u * v);
}

HessianReport hessian_min_eigen(const ScalarField& f, const Background& bg,
                                double tol, const EigenOptions& options) {
  require_balanced(bg);
  HessianOperator op(f, bg);

  std::mt19937_64 rng(options.seed);
  // White noise: at constant f the operator is Fourier-diagonal, so the
  // start vector must touch every mode.
  std::normal_distribution<double> noise;
  ScalarField x(f.grid_ptr());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = noise(rng);
  x = op.project(x);
  x *= 1.0 / l2_norm(x);
  ScalarField ax = op.apply(x);
  double theta = inner(x, ax);
  std::optional<ScalarField> p;

  for (int it = 1; it <= options.max_iterations; ++it) {
    ScalarField r = ax;
    r.add_scaled(-theta, x);
    ScalarField wdir = op.precondition(r);

    // Rayleigh-Ritz on span{x, w, p} after L2 Gram-Schmidt.
    std::vector<ScalarField> basis{x};
    std::vector<ScalarField> images{ax};
    auto add_direction = [&](ScalarField d) {
      for (std::size_t b = 0; b < basis.size(); ++b) {
        d.add_scaled(-inner(basis[b], d), basis[b]);
      }
      const double norm = l2_norm(d);
      if (norm < 1e-12) return;
      d *= 1.0 / norm;
      images.push_back(op.apply(d));
      basis.push_back(std::move(d));
    };
    add_direction(std::move(wdir));
    if (p) add_direction(*p);

    const auto m = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i; j < m; ++j) {
        gram(i, j) = gram(j, i) =
            0.5 * (inner(basis[i], images[j]) + inner(basis[j], images[i]));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd c = es.eigenvectors().col(0);

    ScalarField x_new(f.grid_ptr());
    ScalarField ax_new(f.grid_ptr());
    ScalarField p_new(f.grid_ptr());
    for (Eigen::Index i = 0; i < m; ++i) {
      x_new.add_scaled(c(i), basis[i]);
      ax_new.add_scaled(c(i), images[i]);
      if (i > 0) {
        p_new.add_scaled(c(i), basis[i]);
      }
    }
    const double norm = l2_norm(x_new);
    x_new *= 1.0 / norm;
    ax_new *= 1.0 / norm;
    x_new = op.project(std::move(x_new));

    const double theta_new = inner(x_new, ax_new);
    ScalarField r_new = ax_new;
    r_new.add_scaled(-theta_new, x_new);
    const double scale = std::max(1.0, std::abs(theta_new));
    const double residual = l2_norm(r_new);
    const bool converged = std::abs(theta_new - theta) <= tol * scale &&
                           residual <= std::sqrt(tol) * scale;
    x = std::move(x_new);
    ax = std::move(ax_new);
    theta = theta_new;
    p = std::move(p_new);
    if (converged) {
      // Recompute exactly from the final vector.
      ax = op.apply(x);
      theta = inner(x, ax);
      HessianReport report{f, theta, x, it, residual, classify(theta)};
      return report;
    }
  }
  std::ostringstream msg;
  msg << "Rayleigh quotient iteration did not converge in "
      << options.max_iterations << " iterations";
  throw Error(ErrorKind::NoConvergence, msg.str());
}

}  // namespace cyflow
