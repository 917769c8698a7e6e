#pragma once

// Model parameters, state containers and initial-data construction.

#include <array>
#include <string>
#include <vector>

#include "eldiff/spectral.hpp"

namespace eldiff {

struct Params {
  double lambda = 0.1;  ///< scaled Debye length; 0 only for the limit system
  double mu = 1.0;      ///< viscosity
  int dim = 2;
  double kappa0 = 0.5;  ///< positivity floor for Z = n + p
};

/// Throws InvalidArgument (or LambdaZero when a positive lambda is required).
void validate_params(const Params& params, bool require_positive_lambda);

/// Spurious negative densities below this value abort a run.
inline constexpr double kNegativeDensityAbort = -1e-3;

/// Debye-length system unknowns at one time.
struct NpnsState {
  double t = 0.0;
  ScalarField n;
  ScalarField p;
  VectorField v;
};

/// Quasineutral system in the Z = n + p reduction.
struct LimitState {
  double t = 0.0;
  ScalarField z;
  VectorField v;
};

enum class TrigKind { Cos, Sin };

struct ProfileTerm {
  std::array<int, 3> mode{0, 0, 0};
  TrigKind kind = TrigKind::Cos;
  double amplitude = 0.0;
};

struct ProfileSpec {
  double offset = 0.0;
  std::vector<ProfileTerm> terms;
};

/// offset + sum amplitude * {cos,sin}(k . x), assembled directly in spectral
/// space so the result is exactly band-limited. Throws ModeOutOfBand for any
/// mode outside the dealiasing band or along an axis the grid lacks.
ScalarField build_profile(GridPtr grid, const ProfileSpec& spec);

struct ConstraintCheck {
  std::string name;
  double residual = 0.0;
  bool passed = false;
};

struct CompatibilityReport {
  std::vector<ConstraintCheck> checks;
  bool all_passed() const;
};

/// Integral constraints on initial data: mean(n - p - D) = 0 and mean(v) = 0.
CompatibilityReport validate_compatibility(const NpnsState& state, const ScalarField& doping,
                                           double tolerance = 1e-10);

struct Densities {
  ScalarField n;
  ScalarField p;
  bool negative_density = false;  ///< min(n) <= 0 or min(p) <= 0
};

/// n = (Z + D) / 2, p = (Z - D) / 2.
Densities recover_np(const ScalarField& z, const ScalarField& doping);

/// Well-prepared Debye-length data built from limit data:
/// n = n0, p = p0 + lambda^2 div E(0), v = v0, with E(0) the limit field.
NpnsState well_prepared_initial(const LimitState& limit0, const ScalarField& doping,
                                const Params& params);

}  // namespace eldiff
