#include "cyflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "cyflow/error.hpp"

namespace cyflow {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int& fft_thread_count() {
  static int n = 1;
  return n;
}

using PlanKey = std::tuple<std::vector<double>, std::vector<int>>;

std::map<PlanKey, std::shared_ptr<const SpectralPlan>>& plan_cache() {
  static std::map<PlanKey, std::shared_ptr<const SpectralPlan>> cache;
  return cache;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

// Neumaier-compensated sum.
double compensated_sum(std::span<const double> v) {
  double sum = 0.0;
  double c = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

}  // namespace

void set_fft_threads(int threads) {
  std::lock_guard lock(planner_mutex());
  static bool initialized = false;
  if (!initialized) {
    fftw_init_threads();
    initialized = true;
  }
  fft_thread_count() = std::max(1, threads);
  fftw_plan_with_nthreads(fft_thread_count());
}

std::shared_ptr<const SpectralPlan> SpectralPlan::for_grid(
    const TorusGrid& grid) {
  PlanKey key{std::vector<double>(grid.periods().begin(), grid.periods().end()),
              std::vector<int>(grid.resolution().begin(),
                               grid.resolution().end())};
  {
    std::lock_guard lock(planner_mutex());
    auto it = plan_cache().find(key);
    if (it != plan_cache().end()) return it->second;
  }
  auto plan = std::make_shared<const SpectralPlan>(grid);
  std::lock_guard lock(planner_mutex());
  auto [it, inserted] = plan_cache().emplace(std::move(key), plan);
  return it->second;
}

SpectralPlan::SpectralPlan(const TorusGrid& grid) : field_size_(grid.size()) {
  const int d = grid.real_dim();
  const auto res = grid.resolution();
  std::vector<int> shape(res.begin(), res.end());
  const int last_modes = shape.back() / 2 + 1;
  spectrum_size_ = field_size_ / static_cast<std::size_t>(shape.back()) *
                   static_cast<std::size_t>(last_modes);

  {
    AlignedVector<double> real_buf(field_size_);
    AlignedVector<Complex> cplx_buf(spectrum_size_);
    std::lock_guard lock(planner_mutex());
    forward_plan_ = fftw_plan_dft_r2c(d, shape.data(), real_buf.data(),
                                      as_fftw(cplx_buf.data()), FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r(d, shape.data(), as_fftw(cplx_buf.data()),
                                      real_buf.data(), FFTW_ESTIMATE);
  }
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr) {
    throw Error(ErrorKind::InvalidGrid, "FFTW could not plan this grid");
  }

  laplacian_symbol_.assign(spectrum_size_, 0.0);
  scaled_laplacian_symbol_.assign(spectrum_size_, 0.0);
  wavenumbers_.assign(static_cast<std::size_t>(d),
                      AlignedVector<double>(spectrum_size_, 0.0));
  dealias_mask_.assign(spectrum_size_, 1);

  std::vector<int> counter(static_cast<std::size_t>(d), 0);
  for (std::size_t s = 0; s < spectrum_size_; ++s) {
    double k2 = 0.0;
    bool keep = true;
    for (int a = 0; a < d; ++a) {
      const int n = shape[a];
      const int j = counter[a];
      const int k = (j <= n / 2) ? j : j - n;
      const double xi = 2.0 * std::numbers::pi * k / grid.periods()[a];
      k2 += xi * xi;
      wavenumbers_[a][s] = (2 * std::abs(k) == n) ? 0.0 : xi;
      if (3 * std::abs(k) > n) keep = false;
    }
    laplacian_symbol_[s] = -k2;
    scaled_laplacian_symbol_[s] = -k2 / static_cast<double>(field_size_);
    dealias_mask_[s] = keep ? 1 : 0;
    for (int a = d - 1; a >= 0; --a) {
      const int extent = (a == d - 1) ? last_modes : shape[a];
      if (++counter[a] < extent) break;
      counter[a] = 0;
    }
  }
}

SpectralPlan::~SpectralPlan() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_ != nullptr) {
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  }
  if (inverse_plan_ != nullptr) {
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  }
}

void SpectralPlan::forward(const double* in, Complex* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_),
                       const_cast<double*>(in), as_fftw(out));
}

void SpectralPlan::inverse(Complex* in, double* out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), as_fftw(in),
                       out);
  const double scale = 1.0 / static_cast<double>(field_size_);
  for (std::size_t i = 0; i < field_size_; ++i) out[i] *= scale;
}

void SpectralPlan::inverse_unscaled(Complex* in, double* out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), as_fftw(in),
                       out);
}

Spectrum forward_transform(const ScalarField& phi) {
  auto plan = SpectralPlan::for_grid(phi.grid());
  Spectrum out{phi.grid_ptr(), AlignedVector<Complex>(plan->spectrum_size())};
  plan->forward(phi.data(), out.coefficients.data());
  return out;
}

ScalarField inverse_transform(Spectrum spectrum) {
  auto plan = SpectralPlan::for_grid(*spectrum.grid);
  if (spectrum.coefficients.size() != plan->spectrum_size()) {
    throw Error(ErrorKind::GridMismatch, "spectrum size does not match grid");
  }
  ScalarField out(spectrum.grid);
  plan->inverse(spectrum.coefficients.data(), out.data());
  return out;
}

SpectralWorkspace::SpectralWorkspace(const TorusGrid& grid)
    : plan_(SpectralPlan::for_grid(grid)), spectrum_(plan_->spectrum_size()) {}

void SpectralWorkspace::laplacian(const double* in, double* out) {
  plan_->forward(in, spectrum_.data());
  const auto sym = plan_->scaled_laplacian_symbol();
  for (std::size_t s = 0; s < spectrum_.size(); ++s) spectrum_[s] *= sym[s];
  plan_->inverse_unscaled(spectrum_.data(), out);
}

void SpectralWorkspace::derivative(const double* in, int axis, double* out) {
  plan_->forward(in, spectrum_.data());
  const auto xi = plan_->wavenumber(axis);
  for (std::size_t s = 0; s < spectrum_.size(); ++s) {
    spectrum_[s] *= Complex(0.0, xi[s]);
  }
  plan_->inverse(spectrum_.data(), out);
}

void SpectralWorkspace::inverse_laplacian(const double* in, double* out) {
  plan_->forward(in, spectrum_.data());
  const auto sym = plan_->laplacian_symbol();
  spectrum_[0] = 0.0;
  for (std::size_t s = 1; s < spectrum_.size(); ++s) spectrum_[s] /= sym[s];
  plan_->inverse(spectrum_.data(), out);
}

void SpectralWorkspace::helmholtz_solve(const double* in, double c,
                                        double* out) {
  plan_->forward(in, spectrum_.data());
  const auto sym = plan_->laplacian_symbol();
  for (std::size_t s = 0; s < spectrum_.size(); ++s) {
    spectrum_[s] /= (1.0 - c * sym[s]);
  }
  plan_->inverse(spectrum_.data(), out);
}

void SpectralWorkspace::dealias(const double* in, double* out) {
  plan_->forward(in, spectrum_.data());
  const auto mask = plan_->dealias_mask();
  for (std::size_t s = 0; s < spectrum_.size(); ++s) {
    if (mask[s] == 0) spectrum_[s] = 0.0;
  }
  plan_->inverse(spectrum_.data(), out);
}

double integrate(const ScalarField& phi) {
  return compensated_sum(phi.values()) * phi.grid().cell_volume();
}

double inner(const ScalarField& a, const ScalarField& b) {
  return integrate(a * b);
}

double l2_norm(const ScalarField& phi) { return std::sqrt(inner(phi, phi)); }

ScalarField laplacian(const ScalarField& phi) {
  SpectralWorkspace ws(phi.grid());
  ScalarField out(phi.grid_ptr());
  ws.laplacian(phi.data(), out.data());
  return out;
}

CovectorField gradient(const ScalarField& phi) {
  SpectralWorkspace ws(phi.grid());
  CovectorField out = CovectorField::zero(phi.grid_ptr());
  for (int a = 0; a < phi.grid().real_dim(); ++a) {
    ws.derivative(phi.data(), a, out.components[a].data());
  }
  return out;
}

ScalarField divergence(const CovectorField& v) {
  SpectralWorkspace ws(*v.grid);
  ScalarField out(v.grid);
  ScalarField tmp(v.grid);
  for (std::size_t a = 0; a < v.components.size(); ++a) {
    ws.derivative(v.components[a].data(), static_cast<int>(a), tmp.data());
    out += tmp;
  }
  return out;
}

ScalarField pairing(const CovectorField& a, const CovectorField& b) {
  require_same_grid(*a.grid, *b.grid);
  ScalarField out(a.grid);
  for (std::size_t c = 0; c < a.components.size(); ++c) {
    const auto& x = a.components[c];
    const auto& y = b.components[c];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += x[i] * y[i];
  }
  return out;
}

ScalarField inverse_laplacian(const ScalarField& rhs) {
  SpectralWorkspace ws(rhs.grid());
  ScalarField out(rhs.grid_ptr());
  ws.inverse_laplacian(rhs.data(), out.data());
  return out;
}

ScalarField dealias(const ScalarField& phi) {
  SpectralWorkspace ws(phi.grid());
  ScalarField out(phi.grid_ptr());
  ws.dealias(phi.data(), out.data());
  return out;
}

ScalarField random_band_limited(const GridPtr& grid, int max_mode,
                                std::mt19937_64& rng, int terms) {
  const int d = grid->real_dim();
  int cap = max_mode;
  for (int a = 0; a < d; ++a) cap = std::min(cap, grid->resolution()[a] / 2 - 1);
  std::uniform_int_distribution<int> mode(-cap, cap);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  struct Term {
    std::vector<double> xi;
    double a;
    double phase;
  };
  std::vector<Term> modes;
  for (int t = 0; t < terms; ++t) {
    Term term{std::vector<double>(static_cast<std::size_t>(d)), amp(rng),
              phase(rng)};
    for (int a = 0; a < d; ++a) {
      term.xi[a] = 2.0 * std::numbers::pi * mode(rng) / grid->periods()[a];
    }
    modes.push_back(std::move(term));
  }
  const double offset = amp(rng);
  return ScalarField::from_function(grid, [&](std::span<const double> x) {
    double v = offset;
    for (const auto& m : modes) {
      double arg = m.phase;
      for (int a = 0; a < d; ++a) arg += m.xi[a] * x[a];
      v += m.a * std::cos(arg);
    }
    return v;
  });
}

}  // namespace cyflow
