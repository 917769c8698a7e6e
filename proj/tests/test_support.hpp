#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "eldiff/spectral.hpp"

namespace eldiff::test {

inline ScalarField from_function(const GridPtr& g, const std::function<double(double, double, double)>& f) {
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto x = g->coordinates(i);
    v[i] = f(x[0], x[1], x[2]);
  }
  return ScalarField::from_physical(g, std::move(v));
}

/// Random real field with modes |k_j| <= kmax and decaying amplitudes.
inline ScalarField random_field(const GridPtr& g, std::mt19937_64& rng, int kmax, double mean = 0.0) {
  std::normal_distribution<double> normal;
  std::vector<cplx> c(g->size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto k = g->wavevector(i);
    bool keep = true;
    double ksq = 0.0;
    for (int j = 0; j < g->dim(); ++j) {
      keep = keep && std::abs(k[j]) <= kmax && std::abs(k[j]) < g->n() / 2;
      ksq += k[j] * k[j];
    }
    if (!keep || ksq == 0.0) continue;
    // fill one of each conjugate pair, then mirror
    std::array<int, 3> mk{-k[0], -k[1], -k[2]};
    std::size_t mi = g->mode_index(mk);
    if (mi < i) continue;
    cplx z(normal(rng), normal(rng));
    z /= (1.0 + ksq);
    c[i] = z;
    c[mi] = std::conj(z);
  }
  c[0] = mean;
  return ScalarField::from_spectral(g, std::move(c));
}

inline double max_diff(const ScalarField& a, const ScalarField& b) { return (a - b).max_abs(); }
inline double max_diff(const VectorField& a, const VectorField& b) { return (a - b).max_abs(); }

}  // namespace eldiff::test
