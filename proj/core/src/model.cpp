#include "eldiff/model.hpp"

#include <cmath>
#include <cstdlib>

#include "eldiff/errors.hpp"
#include "eldiff/quasineutral.hpp"

namespace eldiff {

void validate_params(const Params& params, bool require_positive_lambda) {
  if (params.dim != 2 && params.dim != 3) {
    throw SolverError(ErrorCode::InvalidArgument, "dim must be 2 or 3");
  }
  if (!(params.mu > 0.0)) {
    throw SolverError(ErrorCode::InvalidArgument, "viscosity mu must be positive");
  }
  if (params.lambda < 0.0) {
    throw SolverError(ErrorCode::InvalidArgument, "lambda must be nonnegative");
  }
  if (require_positive_lambda && !(params.lambda > 0.0)) {
    throw SolverError(ErrorCode::LambdaZero, "lambda = 0 is reserved for the limit system");
  }
  if (!(params.kappa0 > 0.0)) {
    throw SolverError(ErrorCode::InvalidArgument, "kappa0 must be positive");
  }
}

ScalarField build_profile(GridPtr grid, const ProfileSpec& spec) {
  const auto& g = *grid;
  std::vector<cplx> c(g.size());
  c[0] += spec.offset;
  for (const auto& term : spec.terms) {
    for (int a = 0; a < 3; ++a) {
      const bool outside = a >= g.dim() ? term.mode[a] != 0 : std::abs(term.mode[a]) > g.band_limit();
      if (outside) {
        throw SolverError(ErrorCode::ModeOutOfBand,
                          "profile mode component " + std::to_string(term.mode[a]) + " on axis " +
                              std::to_string(a) + " outside the resolved band");
      }
    }
    auto neg = term.mode;
    for (auto& k : neg) k = -k;
    const std::size_t ip = g.mode_index(term.mode);
    const std::size_t in = g.mode_index(neg);
    if (ip == in) {
      // zero mode: sin(0) = 0, cos(0) = 1
      if (term.kind == TrigKind::Cos) c[ip] += term.amplitude;
      continue;
    }
    if (term.kind == TrigKind::Cos) {
      c[ip] += 0.5 * term.amplitude;
      c[in] += 0.5 * term.amplitude;
    } else {
      c[ip] += cplx(0.0, -0.5 * term.amplitude);
      c[in] += cplx(0.0, 0.5 * term.amplitude);
    }
  }
  return ScalarField::from_spectral(std::move(grid), std::move(c));
}

bool CompatibilityReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

CompatibilityReport validate_compatibility(const NpnsState& state, const ScalarField& doping,
                                           double tolerance) {
  CompatibilityReport report;
  const double charge = state.n.mean() - state.p.mean() - doping.mean();
  report.checks.push_back({"mean(n - p - D)", charge, std::abs(charge) <= tolerance});
  static const char* names[] = {"mean(v_1)", "mean(v_2)", "mean(v_3)"};
  for (int a = 0; a < state.v.dim(); ++a) {
    const double m = state.v[a].mean();
    report.checks.push_back({names[a], m, std::abs(m) <= tolerance});
  }
  return report;
}

Densities recover_np(const ScalarField& z, const ScalarField& doping) {
  Densities d{0.5 * (z + doping), 0.5 * (z - doping), false};
  d.negative_density = d.n.min() <= 0.0 || d.p.min() <= 0.0;
  return d;
}

NpnsState well_prepared_initial(const LimitState& limit0, const ScalarField& doping,
                                const Params& params) {
  validate_params(params, true);
  EllipticOptions opts;
  opts.kappa0 = params.kappa0;
  if (limit0.z.min() < params.kappa0) {
    throw SolverError(ErrorCode::NonPositiveZ,
                      "initial Z falls below kappa0 = " + std::to_string(params.kappa0));
  }
  const auto potential = solve_limit_potential(limit0.z, doping, limit0.v, opts);
  auto densities = recover_np(limit0.z, doping);
  const double l2 = params.lambda * params.lambda;
  NpnsState out;
  out.t = limit0.t;
  out.n = std::move(densities.n);
  out.p = densities.p + l2 * divergence(potential.field);
  out.v = limit0.v;
  return out;
}

}  // namespace eldiff
