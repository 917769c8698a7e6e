#pragma once

// Manufactured solutions for both systems. Exact fields are written as
// functions of (x1, x2, x3, t) over second-order jets, so the forcing that
// makes them exact is evaluated pointwise without any discrete operator.

#include <array>
#include <cmath>
#include <functional>

#include "eldiff/model.hpp"
#include "eldiff/npns.hpp"
#include "eldiff/quasineutral.hpp"
#include "eldiff/spectral.hpp"

namespace eldiff::mms {

/// Value, gradient and Hessian with respect to (x1, x2, x3, t).
class Jet {
 public:
  static constexpr int kVars = 4;
  static constexpr int kTime = 3;

  Jet() = default;
  Jet(double value) : value_(value) {}  // NOLINT: constants promote implicitly

  static Jet variable(int index, double value);

  double value() const { return value_; }
  double d(int i) const { return grad_[i]; }
  double d2(int i, int j) const { return hess_[i][j]; }
  double dt() const { return grad_[kTime]; }
  /// Spatial Laplacian over the first `dim` variables.
  double laplacian(int dim) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
  friend Jet operator-(const Jet& a);

  friend Jet sin(const Jet& a);
  friend Jet cos(const Jet& a);
  friend Jet exp(const Jet& a);

 private:
  // f(a) with f', f'' evaluated at a's value.
  static Jet chain(const Jet& a, double f, double df, double d2f);

  double value_ = 0.0;
  std::array<double, kVars> grad_{};
  std::array<std::array<double, kVars>, kVars> hess_{};
};

using Vars = std::array<Jet, Jet::kVars>;
using JetFn = std::function<Jet(const Vars&)>;

/// Exact solution of the Debye-length system. p is derived so the Poisson
/// equation holds exactly: p = n - D - lambda^2 lap_phi; lap_phi must be
/// the exact Laplacian of phi including its spatial derivatives.
struct NpnsSolution {
  JetFn n;
  JetFn phi;
  JetFn lap_phi;
  JetFn doping;  ///< time independent
  std::array<JetFn, 3> v;  ///< component i must not depend on x_i
};

/// Exact solution of the limit system; the elliptic relation is closed by a
/// manufactured source.
struct LimitSolution {
  JetFn z;
  JetFn phi;
  JetFn doping;
  std::array<JetFn, 3> v;
};

ScalarField sample(const GridPtr& grid, const JetFn& fn, double t);

ScalarField npns_doping(const GridPtr& grid, const NpnsSolution& sol);
NpnsState npns_exact(const GridPtr& grid, const NpnsSolution& sol, const Params& params, double t);
NpnsForcing npns_forcing(const GridPtr& grid, const NpnsSolution& sol, const Params& params);

ScalarField limit_doping(const GridPtr& grid, const LimitSolution& sol);
LimitState limit_exact(const GridPtr& grid, const LimitSolution& sol, int dim, double t);
LimitForcingFn limit_forcing(const GridPtr& grid, const LimitSolution& sol, const Params& params);

/// Band-limited (|k| <= 2), time-dependent fields for temporal-order studies.
NpnsSolution npns_temporal();
LimitSolution limit_temporal();
/// Steady analytic (not band-limited) fields for spatial-order studies.
NpnsSolution npns_spatial();
LimitSolution limit_spatial();
/// n = p = c, D = 0, v = 0: zero forcing.
NpnsSolution npns_constant(double c);

}  // namespace eldiff::mms
