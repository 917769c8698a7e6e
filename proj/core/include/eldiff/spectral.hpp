#pragma once

// Periodic pseudospectral toolbox on [0, 2*pi)^d.
//
// Conventions:
//   * coefficients u_k = N^{-d} sum_j u(x_j) exp(-i k.x_j), so the zero mode
//     is the grid mean and Parseval reads mean(|u|^2) = sum_k |u_k|^2;
//   * flat indices are row-major with axis 0 slowest;
//   * derivatives use the "derivative wavenumber" kappa_j, which equals k_j
//     except on the Nyquist index of axis j where it is zero. Every
//     differential operator, the Leray projector and the Sobolev weights are
//     built from kappa, which keeps them mutually consistent and keeps
//     derivatives of real fields real.

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace eldiff {

using cplx = std::complex<double>;

class Grid {
 public:
  /// dim in {2, 3}; n even, power of two, >= 8.
  Grid(int dim, int n);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int dim() const { return dim_; }
  int n() const { return n_; }
  std::size_t size() const { return size_; }
  double spacing() const;

  /// Signed wavenumber of a one-dimensional index, in [-n/2, n/2 - 1].
  int wavenumber(int index) const { return index < n_ / 2 ? index : index - n_; }

  /// Integer wavevector of a flat index (unused axes are zero).
  std::array<int, 3> wavevector(std::size_t flat) const;
  /// Grid-point multi-index of a flat index.
  std::array<int, 3> point_index(std::size_t flat) const;
  /// Physical coordinates of a flat index.
  std::array<double, 3> coordinates(std::size_t flat) const;
  /// Flat index of a (possibly negative) wavevector.
  std::size_t mode_index(const std::array<int, 3>& k) const;

  double kappa(std::size_t flat, int axis) const { return kappa_[flat * 3 + axis]; }
  double kappa_sq(std::size_t flat) const { return kappa_sq_[flat]; }
  bool is_nyquist(std::size_t flat) const { return nyquist_[flat] != 0; }
  /// True when every |k_j| <= n/3 (the 2/3-rule band).
  bool in_band(std::size_t flat) const { return band_[flat] != 0; }
  /// Largest |k_j| kept by dealiasing.
  int band_limit() const { return n_ / 3; }

  void forward(std::span<const double> values, std::span<cplx> coeffs) const;
  /// Inverse transform; discards the imaginary part.
  void inverse(std::span<const cplx> coeffs, std::span<double> values) const;

 private:
  struct Plans;

  int dim_;
  int n_;
  std::size_t size_;
  std::vector<double> kappa_;
  std::vector<double> kappa_sq_;
  std::vector<unsigned char> nyquist_;
  std::vector<unsigned char> band_;
  std::unique_ptr<Plans> plans_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int dim, int n);

/// Real scalar field holding synchronized physical values and spectral
/// coefficients. Both representations are always valid; arithmetic that is
/// linear acts on both without a transform.
class ScalarField {
 public:
  ScalarField() = default;

  static ScalarField zeros(GridPtr grid);
  static ScalarField constant(GridPtr grid, double value);
  static ScalarField from_physical(GridPtr grid, std::vector<double> values);
  /// Coefficients must be conjugate-symmetric for the result to be faithful.
  static ScalarField from_spectral(GridPtr grid, std::vector<cplx> coeffs);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool empty() const { return grid_ == nullptr; }

  std::span<const double> values() const { return values_; }
  std::span<const cplx> coeffs() const { return coeffs_; }

  double mean() const { return coeffs_.empty() ? 0.0 : coeffs_[0].real(); }
  double min() const;
  double max() const;
  double max_abs() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }
  ScalarField operator-() const { return -1.0 * *this; }

 private:
  ScalarField(GridPtr grid, std::vector<double> values, std::vector<cplx> coeffs);

  GridPtr grid_;
  std::vector<double> values_;
  std::vector<cplx> coeffs_;
};

/// dim components sharing one grid.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(std::vector<ScalarField> components);

  static VectorField zeros(GridPtr grid);

  int dim() const { return static_cast<int>(components_.size()); }
  const ScalarField& operator[](int i) const { return components_[i]; }
  ScalarField& operator[](int i) { return components_[i]; }
  const std::vector<ScalarField>& components() const { return components_; }
  const Grid& grid() const { return components_.front().grid(); }
  const GridPtr& grid_ptr() const { return components_.front().grid_ptr(); }
  bool empty() const { return components_.empty(); }

  double max_abs() const;

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double s);

  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }
  friend VectorField operator*(VectorField a, double s) { return a *= s; }
  VectorField operator-() const { return -1.0 * *this; }

 private:
  std::vector<ScalarField> components_;
};

// Differential operators.
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& f);
ScalarField laplacian(const ScalarField& f);
VectorField laplacian(const VectorField& f);
/// Throws NonZeroMean unless |mean(f)| <= 1e-10 * ||f||. The zero mode (and
/// any mode with vanishing kappa) is set to zero.
ScalarField inverse_laplacian(const ScalarField& f);
/// Like inverse_laplacian but silently drops the mean.
ScalarField inverse_laplacian_mean_free(const ScalarField& f);

/// 2/3 rule: zero every mode with some |k_j| > n/3.
ScalarField dealias(const ScalarField& f);
VectorField dealias(const VectorField& f);
bool is_band_limited(const ScalarField& f);

/// Pseudospectral product. With dealiasing on, both factors and the result
/// are truncated to the 2/3 band.
ScalarField multiply(const ScalarField& a, const ScalarField& b, bool dealiased = true);
VectorField multiply(const ScalarField& a, const VectorField& b, bool dealiased = true);
/// (u . grad) w
VectorField advect(const VectorField& u, const VectorField& w, bool dealiased = true);
/// u . w
ScalarField dot(const VectorField& u, const VectorField& w, bool dealiased = true);

VectorField leray_project(const VectorField& f);

/// sqrt(sum_k (1 + |kappa|^2)^s |f_k|^2), summed over components.
double sobolev_norm(const ScalarField& f, int s);
double sobolev_norm(const VectorField& f, int s);
inline double l2_norm(const ScalarField& f) { return sobolev_norm(f, 0); }
inline double l2_norm(const VectorField& f) { return sobolev_norm(f, 0); }

/// Squared L2 norm of the full gradient tensor, sum_k |kappa|^2 |f_k|^2.
double gradient_norm_sq(const ScalarField& f);
double gradient_norm_sq(const VectorField& f);

}  // namespace eldiff
