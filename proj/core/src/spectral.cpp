#include "eldiff/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "eldiff/errors.hpp"

namespace eldiff {

namespace {

// FFTW's planner is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (a.grid_ptr() != b.grid_ptr()) {
    throw SolverError(ErrorCode::InvalidArgument, "fields live on different grids");
  }
}

}  // namespace

struct Grid::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

Grid::Grid(int dim, int n) : dim_(dim), n_(n) {
  if (dim != 2 && dim != 3) {
    throw SolverError(ErrorCode::InvalidArgument, "grid dimension must be 2 or 3");
  }
  if (n < 8 || (n & (n - 1)) != 0) {
    throw SolverError(ErrorCode::InvalidArgument,
                      "points per axis must be a power of two >= 8, got " + std::to_string(n));
  }
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);

  kappa_.assign(size_ * 3, 0.0);
  kappa_sq_.assign(size_, 0.0);
  nyquist_.assign(size_, 0);
  band_.assign(size_, 1);
  const int band = band_limit();
  for (std::size_t flat = 0; flat < size_; ++flat) {
    const auto idx = point_index(flat);
    double ksq = 0.0;
    for (int a = 0; a < dim; ++a) {
      const int k = wavenumber(idx[a]);
      if (idx[a] == n / 2) {
        nyquist_[flat] = 1;
      } else {
        kappa_[flat * 3 + a] = k;
        ksq += static_cast<double>(k) * k;
      }
      if (std::abs(k) > band) band_[flat] = 0;
    }
    kappa_sq_[flat] = ksq;
  }

  plans_ = std::make_unique<Plans>();
  std::array<int, 3> dims{n, n, n};
  std::vector<cplx> in(size_), out(size_);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->forward = fftw_plan_dft(dim, dims.data(), as_fftw(in.data()), as_fftw(out.data()),
                                  FFTW_FORWARD, flags);
  plans_->backward = fftw_plan_dft(dim, dims.data(), as_fftw(in.data()), as_fftw(out.data()),
                                   FFTW_BACKWARD, flags);
}

Grid::~Grid() {
  if (!plans_) return;
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plans_->forward);
  fftw_destroy_plan(plans_->backward);
}

double Grid::spacing() const { return 2.0 * std::numbers::pi / n_; }

std::array<int, 3> Grid::point_index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

std::array<int, 3> Grid::wavevector(std::size_t flat) const {
  auto idx = point_index(flat);
  for (int a = 0; a < dim_; ++a) idx[a] = wavenumber(idx[a]);
  return idx;
}

std::array<double, 3> Grid::coordinates(std::size_t flat) const {
  const auto idx = point_index(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = spacing() * idx[a];
  return x;
}

std::size_t Grid::mode_index(const std::array<int, 3>& k) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) {
    const int i = ((k[a] % n_) + n_) % n_;
    flat = flat * n_ + static_cast<std::size_t>(i);
  }
  return flat;
}

void Grid::forward(std::span<const double> values, std::span<cplx> coeffs) const {
  std::vector<cplx> in(values.begin(), values.end());
  fftw_execute_dft(plans_->forward, as_fftw(in.data()), as_fftw(coeffs.data()));
  const double scale = 1.0 / static_cast<double>(size_);
  for (auto& c : coeffs) c *= scale;
}

void Grid::inverse(std::span<const cplx> coeffs, std::span<double> values) const {
  std::vector<cplx> in(coeffs.begin(), coeffs.end());
  std::vector<cplx> out(size_);
  fftw_execute_dft(plans_->backward, as_fftw(in.data()), as_fftw(out.data()));
  for (std::size_t i = 0; i < size_; ++i) values[i] = out[i].real();
}

GridPtr make_grid(int dim, int n) { return std::make_shared<const Grid>(dim, n); }

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(GridPtr grid, std::vector<double> values, std::vector<cplx> coeffs)
    : grid_(std::move(grid)), values_(std::move(values)), coeffs_(std::move(coeffs)) {}

ScalarField ScalarField::zeros(GridPtr grid) {
  const auto n = grid->size();
  return ScalarField(std::move(grid), std::vector<double>(n, 0.0), std::vector<cplx>(n));
}

ScalarField ScalarField::constant(GridPtr grid, double value) {
  const auto n = grid->size();
  std::vector<cplx> c(n);
  c[0] = value;
  return ScalarField(std::move(grid), std::vector<double>(n, value), std::move(c));
}

ScalarField ScalarField::from_physical(GridPtr grid, std::vector<double> values) {
  if (values.size() != grid->size()) {
    throw SolverError(ErrorCode::InvalidArgument, "value count does not match grid");
  }
  std::vector<cplx> c(grid->size());
  grid->forward(values, c);
  return ScalarField(std::move(grid), std::move(values), std::move(c));
}

ScalarField ScalarField::from_spectral(GridPtr grid, std::vector<cplx> coeffs) {
  if (coeffs.size() != grid->size()) {
    throw SolverError(ErrorCode::InvalidArgument, "coefficient count does not match grid");
  }
  std::vector<double> v(grid->size());
  grid->inverse(coeffs, v);
  return ScalarField(std::move(grid), std::move(v), std::move(coeffs));
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] += other.values_[i];
    coeffs_[i] += other.coeffs_[i];
  }
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] -= other.values_[i];
    coeffs_[i] -= other.coeffs_[i];
  }
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (auto& v : values_) v *= s;
  for (auto& c : coeffs_) c *= s;
  return *this;
}

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
  if (components_.empty()) {
    throw SolverError(ErrorCode::InvalidArgument, "vector field needs components");
  }
  for (const auto& c : components_) {
    if (c.grid_ptr() != components_.front().grid_ptr()) {
      throw SolverError(ErrorCode::InvalidArgument, "vector components on different grids");
    }
  }
  if (static_cast<int>(components_.size()) != components_.front().grid().dim()) {
    throw SolverError(ErrorCode::InvalidArgument, "component count must equal grid dimension");
  }
}

VectorField VectorField::zeros(GridPtr grid) {
  std::vector<ScalarField> c;
  for (int a = 0; a < grid->dim(); ++a) c.push_back(ScalarField::zeros(grid));
  return VectorField(std::move(c));
}

double VectorField::max_abs() const {
  // Pointwise Euclidean magnitude.
  const auto n = grid().size();
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto& c : components_) s += c.values()[i] * c.values()[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

VectorField& VectorField::operator+=(const VectorField& other) {
  for (int a = 0; a < dim(); ++a) components_[a] += other.components_[a];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  for (int a = 0; a < dim(); ++a) components_[a] -= other.components_[a];
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (auto& c : components_) c *= s;
  return *this;
}

// ---------------------------------------------------------------------------
// Operators

namespace {

template <class Fn>
ScalarField map_modes(const ScalarField& f, Fn&& fn) {
  const auto& g = f.grid();
  std::vector<cplx> out(g.size());
  const auto in = f.coeffs();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = fn(i, in[i]);
  return ScalarField::from_spectral(f.grid_ptr(), std::move(out));
}

}  // namespace

VectorField gradient(const ScalarField& f) {
  const auto& g = f.grid();
  std::vector<ScalarField> comps;
  for (int a = 0; a < g.dim(); ++a) {
    comps.push_back(map_modes(f, [&](std::size_t i, cplx c) { return cplx(0.0, g.kappa(i, a)) * c; }));
  }
  return VectorField(std::move(comps));
}

ScalarField divergence(const VectorField& f) {
  const auto& g = f.grid();
  std::vector<cplx> out(g.size());
  for (int a = 0; a < g.dim(); ++a) {
    const auto in = f[a].coeffs();
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += cplx(0.0, g.kappa(i, a)) * in[i];
  }
  return ScalarField::from_spectral(f.grid_ptr(), std::move(out));
}

ScalarField laplacian(const ScalarField& f) {
  const auto& g = f.grid();
  return map_modes(f, [&](std::size_t i, cplx c) { return -g.kappa_sq(i) * c; });
}

VectorField laplacian(const VectorField& f) {
  std::vector<ScalarField> comps;
  for (const auto& c : f.components()) comps.push_back(laplacian(c));
  return VectorField(std::move(comps));
}

ScalarField inverse_laplacian_mean_free(const ScalarField& f) {
  const auto& g = f.grid();
  return map_modes(f, [&](std::size_t i, cplx c) {
    const double ksq = g.kappa_sq(i);
    return ksq > 0.0 ? -c / ksq : cplx(0.0, 0.0);
  });
}

ScalarField inverse_laplacian(const ScalarField& f) {
  const double norm = l2_norm(f);
  if (std::abs(f.mean()) > 1e-10 * norm) {
    throw SolverError(ErrorCode::NonZeroMean,
                      "inverse Laplacian of a field with mean " + std::to_string(f.mean()));
  }
  return inverse_laplacian_mean_free(f);
}

bool is_band_limited(const ScalarField& f) {
  const auto& g = f.grid();
  const auto c = f.coeffs();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.in_band(i) && c[i] != cplx(0.0, 0.0)) return false;
  }
  return true;
}

ScalarField dealias(const ScalarField& f) {
  if (is_band_limited(f)) return f;
  const auto& g = f.grid();
  return map_modes(f, [&](std::size_t i, cplx c) { return g.in_band(i) ? c : cplx(0.0, 0.0); });
}

VectorField dealias(const VectorField& f) {
  std::vector<ScalarField> comps;
  for (const auto& c : f.components()) comps.push_back(dealias(c));
  return VectorField(std::move(comps));
}

namespace {

ScalarField raw_product(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  const auto n = a.grid().size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a.values()[i] * b.values()[i];
  return ScalarField::from_physical(a.grid_ptr(), std::move(v));
}

}  // namespace

ScalarField multiply(const ScalarField& a, const ScalarField& b, bool dealiased) {
  if (!dealiased) return raw_product(a, b);
  return dealias(raw_product(dealias(a), dealias(b)));
}

VectorField multiply(const ScalarField& a, const VectorField& b, bool dealiased) {
  const ScalarField ad = dealiased ? dealias(a) : a;
  std::vector<ScalarField> comps;
  for (const auto& c : b.components()) comps.push_back(multiply(ad, c, dealiased));
  return VectorField(std::move(comps));
}

VectorField advect(const VectorField& u, const VectorField& w, bool dealiased) {
  const int d = u.dim();
  std::vector<ScalarField> comps;
  for (int i = 0; i < d; ++i) {
    const auto dw = gradient(w[i]);
    ScalarField acc = multiply(u[0], dw[0], dealiased);
    for (int j = 1; j < d; ++j) acc += multiply(u[j], dw[j], dealiased);
    comps.push_back(std::move(acc));
  }
  return VectorField(std::move(comps));
}

ScalarField dot(const VectorField& u, const VectorField& w, bool dealiased) {
  ScalarField acc = multiply(u[0], w[0], dealiased);
  for (int j = 1; j < u.dim(); ++j) acc += multiply(u[j], w[j], dealiased);
  return acc;
}

VectorField leray_project(const VectorField& f) {
  const auto& g = f.grid();
  const int d = g.dim();
  std::vector<std::vector<cplx>> out(d, std::vector<cplx>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double ksq = g.kappa_sq(i);
    cplx kf(0.0, 0.0);
    for (int a = 0; a < d; ++a) kf += g.kappa(i, a) * f[a].coeffs()[i];
    for (int a = 0; a < d; ++a) {
      out[a][i] = f[a].coeffs()[i];
      if (ksq > 0.0) out[a][i] -= g.kappa(i, a) * kf / ksq;
    }
  }
  std::vector<ScalarField> comps;
  for (int a = 0; a < d; ++a) comps.push_back(ScalarField::from_spectral(f.grid_ptr(), std::move(out[a])));
  return VectorField(std::move(comps));
}

namespace {

double weighted_sum(const ScalarField& f, int s) {
  const auto& g = f.grid();
  const auto c = f.coeffs();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    acc += std::pow(1.0 + g.kappa_sq(i), s) * std::norm(c[i]);
  }
  return acc;
}

}  // namespace

double sobolev_norm(const ScalarField& f, int s) {
  if (s < 0) throw SolverError(ErrorCode::InvalidArgument, "Sobolev index must be >= 0");
  return std::sqrt(weighted_sum(f, s));
}

double sobolev_norm(const VectorField& f, int s) {
  if (s < 0) throw SolverError(ErrorCode::InvalidArgument, "Sobolev index must be >= 0");
  double acc = 0.0;
  for (const auto& c : f.components()) acc += weighted_sum(c, s);
  return std::sqrt(acc);
}

double gradient_norm_sq(const ScalarField& f) {
  const auto& g = f.grid();
  const auto c = f.coeffs();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += g.kappa_sq(i) * std::norm(c[i]);
  return acc;
}

double gradient_norm_sq(const VectorField& f) {
  double acc = 0.0;
  for (const auto& c : f.components()) acc += gradient_norm_sq(c);
  return acc;
}

}  // namespace eldiff
