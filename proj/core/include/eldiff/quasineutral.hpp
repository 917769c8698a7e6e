#pragma once

// Quasineutral limit system in the Z = n + p reduction:
//
//   Z_t = div(grad Z + D E - Z v)
//   0   = div(grad D + Z E - D v),   E = -grad Phi
//   v_t + v.grad v + grad pi - mu Lap v = -D E,   div v = 0
//
// The limit field E is diagnostic: each evaluation solves the variable
// coefficient problem div(Z grad Phi) = Lap D - div(D v) by preconditioned
// conjugate gradients with the constant-coefficient inverse Laplacian.

#include <functional>
#include <optional>
#include <vector>

#include "eldiff/model.hpp"
#include "eldiff/npns.hpp"
#include "eldiff/spectral.hpp"

namespace eldiff {

struct EllipticOptions {
  double tolerance = 1e-10;
  int max_iterations = 500;
  double kappa0 = 0.5;  ///< NonPositiveZ below kappa0 / 2
  bool dealias = true;
};

struct EllipticSolveReport {
  int iterations = 0;
  double residual = 0.0;  ///< relative, measured against the right-hand side
  bool converged = false;
};

struct LimitPotential {
  ScalarField potential;
  VectorField field;
  EllipticSolveReport report;
};

/// Throws NonPositiveZ or NotConverged. `source`, when given, is added to
/// the right-hand side (manufactured-solution forcing); `guess` warm-starts
/// the iteration.
LimitPotential solve_limit_potential(const ScalarField& z, const ScalarField& doping,
                                     const VectorField& v, const EllipticOptions& options = {},
                                     const ScalarField* source = nullptr,
                                     const ScalarField* guess = nullptr);

/// ||div(grad D + Z E - D v) + source|| / ||Lap D - div(D v) + source||.
double limit_relation_residual(const ScalarField& z, const ScalarField& doping,
                               const VectorField& v, const VectorField& field,
                               const ScalarField* source = nullptr, bool dealiased = true);

struct LimitTendency {
  ScalarField dz_dt;
  VectorField dv_dt;  ///< Leray-projected
};

LimitTendency limit_rhs(const LimitState& state, const ScalarField& doping, const Params& params,
                        const EllipticOptions& options = {});

/// Tendency for a state whose limit field is already known.
LimitTendency limit_rhs_with_field(const LimitState& state, const ScalarField& doping,
                                   const Params& params, const VectorField& field,
                                   bool dealiased = true);

struct LimitForcing {
  ScalarField dz;
  VectorField dv;
  ScalarField elliptic_source;
};

using LimitForcingFn = std::function<LimitForcing(double t)>;

double stable_dt_limit(const LimitState& state, const VectorField& field, const Params& params,
                       const StepControl& control);

LimitState step_imex_euler_limit(const LimitState& curr, double dt, const ScalarField& doping,
                                 const Params& params, const LimitForcingFn& forcing = {},
                                 const EllipticOptions& options = {});

LimitState step_sbdf_limit(const LimitState& prev, const LimitState& curr, double dt,
                           const ScalarField& doping, const Params& params,
                           const LimitForcingFn& forcing = {}, const EllipticOptions& options = {});

enum class StencilKind { Centered, Forward, Backward };

struct LimitSnapshot {
  double t = 0.0;
  LimitState state;
  LimitPotential potential;
  ScalarField n;
  ScalarField p;
  LimitTendency tendency;
  /// Limit fields for the time-derivative stencil of E:
  /// Centered: {E(t-h), E(t+h)}; Forward: {E(t), E(t+h), E(t+2h)};
  /// Backward: {E(t), E(t-h), E(t-2h)}.
  StencilKind stencil = StencilKind::Centered;
  double stencil_spacing = 0.0;
  std::vector<VectorField> field_stencil;
};

struct LimitTrajectory {
  double dt = 0.0;
  std::vector<LimitSnapshot> snapshots;
  std::vector<StepRecord> steps;
  std::vector<std::string> warnings;
  std::optional<RunFailure> failure;
};

LimitTrajectory run_limit(const LimitState& initial, const ScalarField& doping,
                          const Params& params, const RunOptions& options,
                          const LimitForcingFn& forcing = {}, const EllipticOptions& elliptic = {});

}  // namespace eldiff
