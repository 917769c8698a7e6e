#pragma once

// Time integration of the Nernst-Planck-Poisson-Navier-Stokes system
//
//   n_t = div(grad n + n E - n v)
//   p_t = div(grad p - p E - p v)
//   lambda^2 Lap Phi = n - p - D,   E = -grad Phi
//   v_t + v.grad v + grad pi - mu Lap v = -(n - p) E,   div v = 0
//
// with SBDF2: diffusion implicit, drift/advection/force explicit.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eldiff/errors.hpp"
#include "eldiff/model.hpp"
#include "eldiff/spectral.hpp"

namespace eldiff {

struct StepControl {
  double dt = 1e-3;  ///< user cap (auto policy) or the step itself (fixed policy)
  double cfl_advect = 0.4;
  double cfl_relax = 0.5;
  bool dealias = true;
  bool fixed_dt = false;
};

struct PoissonSolution {
  ScalarField potential;
  VectorField field;  ///< E = -grad Phi
};

/// Solves lambda^2 Lap Phi = n - p - D for mean-zero Phi.
/// Throws LambdaZero for lambda <= 0 and NonZeroMean when
/// |mean(n - p - D)| > 1e-10 (||n|| + ||p|| + ||D|| + 1).
PoissonSolution solve_poisson(const ScalarField& n, const ScalarField& p,
                              const ScalarField& doping, double lambda);

/// ||lambda^2 Lap Phi - (n - p - D)|| / ||n - p - D|| (absolute if the
/// right-hand side vanishes).
double poisson_residual(const ScalarField& n, const ScalarField& p, const ScalarField& doping,
                        double lambda, const ScalarField& potential);

struct NpnsTendency {
  ScalarField dn_dt;
  ScalarField dp_dt;
  VectorField dv_dt;  ///< Leray-projected
};

/// Full semi-discrete right-hand side.
NpnsTendency npns_rhs(const NpnsState& state, const ScalarField& doping, const Params& params,
                      bool dealiased = true);

double stable_dt(const NpnsState& state, const ScalarField& doping, const Params& params,
                 const StepControl& control);

/// Optional manufactured forcing added to each equation, sampled at t.
using NpnsForcing = std::function<NpnsTendency(double t)>;

/// First-order IMEX Euler step (SBDF2 bootstrap).
NpnsState step_imex_euler(const NpnsState& curr, double dt, const ScalarField& doping,
                          const Params& params, const NpnsForcing& forcing = {},
                          bool dealiased = true);

/// One SBDF2 step from (prev, curr), spaced by dt.
NpnsState step_sbdf(const NpnsState& prev, const NpnsState& curr, double dt,
                    const ScalarField& doping, const Params& params,
                    const NpnsForcing& forcing = {}, bool dealiased = true);

/// Per-step monitoring row, shared by both solvers.
struct StepRecord {
  double t = 0.0;
  double mean_n = 0.0;
  double mean_p = 0.0;
  double mean_z = 0.0;
  double norm_n = 0.0;
  double norm_p = 0.0;
  double norm_v = 0.0;
  double min_n = 0.0;
  double min_p = 0.0;
  double residual = 0.0;  ///< Poisson (or limit elliptic) relative residual
  double div_v = 0.0;     ///< ||div v|| / ||v||
};

struct RunFailure {
  ErrorCode code;
  std::string message;
};

struct NpnsSnapshot {
  double t = 0.0;
  NpnsState state;
  PoissonSolution poisson;
  NpnsTendency tendency;
};

struct NpnsTrajectory {
  double dt = 0.0;
  std::vector<NpnsSnapshot> snapshots;
  std::vector<StepRecord> steps;
  std::vector<std::string> warnings;
  std::optional<RunFailure> failure;
};

struct RunOptions {
  double final_time = 0.0;
  std::vector<double> snapshot_times;  ///< sorted, within [0, final_time]
  StepControl control;
  bool throw_on_failure = true;
  bool record_steps = true;
};

/// Uniform snapshot times k T / count, k = 0..count.
std::vector<double> uniform_snapshot_times(double final_time, int count);

/// Largest step <= target that puts every snapshot time (and the final
/// time) on a step boundary.
double aligned_step(double target, double final_time, const std::vector<double>& snapshot_times);

/// Integrates to final_time; throws BlowUp / NegativeDensity unless
/// throw_on_failure is false, in which case the partial trajectory carries
/// the failure.
NpnsTrajectory run_npns(const NpnsState& initial, const ScalarField& doping, const Params& params,
                        const RunOptions& options, const NpnsForcing& forcing = {});

}  // namespace eldiff
