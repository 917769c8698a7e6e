#pragma once

// Mode-wise IMEX updates for u_t = nu Lap u + N(u) + f.

#include <vector>

#include "eldiff/spectral.hpp"

namespace eldiff::detail {

inline constexpr double kBlowUpLimit = 1e6;
inline constexpr std::size_t kMaxWarnings = 20;

/// Step index of every snapshot time; throws unless sorted.
std::vector<long> snapshot_steps(const std::vector<double>& times, double dt);

/// SBDF2: (3u' - 4u + u_prev) / (2 dt) = -nu |k|^2 u' + 2 N - N_prev + f.
ScalarField sbdf2(const ScalarField& curr, const ScalarField& prev, const ScalarField& explicit_curr,
                  const ScalarField& explicit_prev, const ScalarField* forcing, double dt, double nu);

/// Euler: (u' - u) / dt = -nu |k|^2 u' + N + f.
ScalarField imex_euler(const ScalarField& curr, const ScalarField& explicit_curr,
                       const ScalarField* forcing, double dt, double nu);

VectorField sbdf2(const VectorField& curr, const VectorField& prev, const VectorField& explicit_curr,
                  const VectorField& explicit_prev, const VectorField* forcing, double dt, double nu);

VectorField imex_euler(const VectorField& curr, const VectorField& explicit_curr,
                       const VectorField* forcing, double dt, double nu);

/// True if any value is non-finite or exceeds `limit` in magnitude.
bool exceeds(const ScalarField& f, double limit);
bool exceeds(const VectorField& f, double limit);

}  // namespace eldiff::detail
