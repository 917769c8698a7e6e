#include "imex.hpp"

#include <cmath>

namespace eldiff::detail {

ScalarField sbdf2(const ScalarField& curr, const ScalarField& prev, const ScalarField& explicit_curr,
                  const ScalarField& explicit_prev, const ScalarField* forcing, double dt, double nu) {
  const auto& g = curr.grid();
  std::vector<cplx> out(g.size());
  const auto u = curr.coeffs();
  const auto um = prev.coeffs();
  const auto nc = explicit_curr.coeffs();
  const auto nm = explicit_prev.coeffs();
  for (std::size_t i = 0; i < g.size(); ++i) {
    cplx rhs = 4.0 * u[i] - um[i] + 2.0 * dt * (2.0 * nc[i] - nm[i]);
    if (forcing) rhs += 2.0 * dt * forcing->coeffs()[i];
    out[i] = rhs / (3.0 + 2.0 * dt * nu * g.kappa_sq(i));
  }
  return ScalarField::from_spectral(curr.grid_ptr(), std::move(out));
}

ScalarField imex_euler(const ScalarField& curr, const ScalarField& explicit_curr,
                       const ScalarField* forcing, double dt, double nu) {
  const auto& g = curr.grid();
  std::vector<cplx> out(g.size());
  const auto u = curr.coeffs();
  const auto nc = explicit_curr.coeffs();
  for (std::size_t i = 0; i < g.size(); ++i) {
    cplx rhs = u[i] + dt * nc[i];
    if (forcing) rhs += dt * forcing->coeffs()[i];
    out[i] = rhs / (1.0 + dt * nu * g.kappa_sq(i));
  }
  return ScalarField::from_spectral(curr.grid_ptr(), std::move(out));
}

VectorField sbdf2(const VectorField& curr, const VectorField& prev, const VectorField& explicit_curr,
                  const VectorField& explicit_prev, const VectorField* forcing, double dt, double nu) {
  std::vector<ScalarField> comps;
  for (int a = 0; a < curr.dim(); ++a) {
    comps.push_back(sbdf2(curr[a], prev[a], explicit_curr[a], explicit_prev[a],
                          forcing ? &(*forcing)[a] : nullptr, dt, nu));
  }
  return VectorField(std::move(comps));
}

VectorField imex_euler(const VectorField& curr, const VectorField& explicit_curr,
                       const VectorField* forcing, double dt, double nu) {
  std::vector<ScalarField> comps;
  for (int a = 0; a < curr.dim(); ++a) {
    comps.push_back(imex_euler(curr[a], explicit_curr[a], forcing ? &(*forcing)[a] : nullptr, dt, nu));
  }
  return VectorField(std::move(comps));
}

bool exceeds(const ScalarField& f, double limit) {
  for (double v : f.values()) {
    if (!std::isfinite(v) || std::abs(v) > limit) return true;
  }
  return false;
}

bool exceeds(const VectorField& f, double limit) {
  for (const auto& c : f.components()) {
    if (exceeds(c, limit)) return true;
  }
  return false;
}

}  // namespace eldiff::detail
