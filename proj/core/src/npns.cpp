#include "eldiff/npns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "imex.hpp"

namespace eldiff {

namespace {

using detail::kBlowUpLimit;
using detail::kMaxWarnings;

struct ExplicitTerms {
  ScalarField n;
  ScalarField p;
  VectorField v;
  PoissonSolution poisson;
};

ExplicitTerms explicit_terms(const NpnsState& s, const ScalarField& doping, const Params& params,
                             bool dealiased) {
  auto poisson = solve_poisson(s.n, s.p, doping, params.lambda);
  const auto& e = poisson.field;
  ScalarField dn = divergence(multiply(s.n, e, dealiased) - multiply(s.n, s.v, dealiased));
  ScalarField dp = -divergence(multiply(s.p, e, dealiased) + multiply(s.p, s.v, dealiased));
  VectorField dv = leray_project(-advect(s.v, s.v, dealiased) - multiply(s.n - s.p, e, dealiased));
  return {std::move(dn), std::move(dp), std::move(dv), std::move(poisson)};
}

NpnsTendency full_rhs(const NpnsState& s, const ExplicitTerms& ex, const Params& params) {
  return {laplacian(s.n) + ex.n, laplacian(s.p) + ex.p,
          leray_project(params.mu * laplacian(s.v) + ex.v)};
}

NpnsTendency prepared_forcing(const NpnsForcing& forcing, double t, bool dealiased) {
  auto f = forcing(t);
  if (dealiased) {
    f.dn_dt = dealias(f.dn_dt);
    f.dp_dt = dealias(f.dp_dt);
    f.dv_dt = dealias(f.dv_dt);
  }
  f.dv_dt = leray_project(f.dv_dt);
  return f;
}

NpnsState advance(const NpnsState& curr, const NpnsState* prev, const ExplicitTerms& ex_curr,
                  const ExplicitTerms* ex_prev, double dt, const Params& params,
                  const NpnsTendency* f) {
  NpnsState next;
  next.t = curr.t + dt;
  if (prev == nullptr) {
    next.n = detail::imex_euler(curr.n, ex_curr.n, f ? &f->dn_dt : nullptr, dt, 1.0);
    next.p = detail::imex_euler(curr.p, ex_curr.p, f ? &f->dp_dt : nullptr, dt, 1.0);
    next.v = detail::imex_euler(curr.v, ex_curr.v, f ? &f->dv_dt : nullptr, dt, params.mu);
  } else {
    next.n = detail::sbdf2(curr.n, prev->n, ex_curr.n, ex_prev->n, f ? &f->dn_dt : nullptr, dt, 1.0);
    next.p = detail::sbdf2(curr.p, prev->p, ex_curr.p, ex_prev->p, f ? &f->dp_dt : nullptr, dt, 1.0);
    next.v = detail::sbdf2(curr.v, prev->v, ex_curr.v, ex_prev->v, f ? &f->dv_dt : nullptr, dt,
                           params.mu);
  }
  next.v = leray_project(next.v);
  return next;
}

double relative_divergence(const VectorField& v) {
  const double nv = l2_norm(v);
  return nv > 0.0 ? l2_norm(divergence(v)) / nv : 0.0;
}

StepRecord make_record(const NpnsState& s, const ScalarField& doping, const Params& params,
                       const PoissonSolution& poisson) {
  StepRecord r;
  r.t = s.t;
  r.mean_n = s.n.mean();
  r.mean_p = s.p.mean();
  r.mean_z = r.mean_n + r.mean_p;
  r.norm_n = l2_norm(s.n);
  r.norm_p = l2_norm(s.p);
  r.norm_v = l2_norm(s.v);
  r.min_n = s.n.min();
  r.min_p = s.p.min();
  r.residual = poisson_residual(s.n, s.p, doping, params.lambda, poisson.potential);
  r.div_v = relative_divergence(s.v);
  return r;
}

}  // namespace

PoissonSolution solve_poisson(const ScalarField& n, const ScalarField& p, const ScalarField& doping,
                              double lambda) {
  if (!(lambda > 0.0)) {
    throw SolverError(ErrorCode::LambdaZero, "Poisson solve needs lambda > 0");
  }
  ScalarField charge = n - p - doping;
  const double scale = l2_norm(n) + l2_norm(p) + l2_norm(doping) + 1.0;
  if (std::abs(charge.mean()) > 1e-10 * scale) {
    throw SolverError(ErrorCode::NonZeroMean,
                      "incompatible Poisson data, mean(n - p - D) = " + std::to_string(charge.mean()));
  }
  ScalarField phi = inverse_laplacian_mean_free((1.0 / (lambda * lambda)) * charge);
  VectorField e = -gradient(phi);
  return {std::move(phi), std::move(e)};
}

double poisson_residual(const ScalarField& n, const ScalarField& p, const ScalarField& doping,
                        double lambda, const ScalarField& potential) {
  const ScalarField charge = n - p - doping;
  const ScalarField residual = (lambda * lambda) * laplacian(potential) - charge;
  const double ref = l2_norm(charge);
  const double res = l2_norm(residual);
  return ref > 0.0 ? res / ref : res;
}

NpnsTendency npns_rhs(const NpnsState& state, const ScalarField& doping, const Params& params,
                      bool dealiased) {
  validate_params(params, true);
  return full_rhs(state, explicit_terms(state, doping, params, dealiased), params);
}

double stable_dt(const NpnsState& state, const ScalarField& doping, const Params& params,
                 const StepControl& control) {
  const double h = state.n.grid().spacing();
  const auto poisson = solve_poisson(state.n, state.p, doping, params.lambda);
  const double speed = std::max({state.v.max_abs(), poisson.field.max_abs(), 1e-12});
  double dt = std::min(control.dt, control.cfl_advect * h / speed);
  const double zmax = (state.n + state.p).max_abs();
  if (zmax > 0.0) dt = std::min(dt, control.cfl_relax * params.lambda * params.lambda / zmax);
  return std::max(dt, 1e-9);
}

NpnsState step_imex_euler(const NpnsState& curr, double dt, const ScalarField& doping,
                          const Params& params, const NpnsForcing& forcing, bool dealiased) {
  validate_params(params, true);
  const auto ex = explicit_terms(curr, doping, params, dealiased);
  std::optional<NpnsTendency> f;
  if (forcing) f = prepared_forcing(forcing, curr.t + dt, dealiased);
  return advance(curr, nullptr, ex, nullptr, dt, params, f ? &*f : nullptr);
}

NpnsState step_sbdf(const NpnsState& prev, const NpnsState& curr, double dt,
                    const ScalarField& doping, const Params& params, const NpnsForcing& forcing,
                    bool dealiased) {
  validate_params(params, true);
  const auto ex_prev = explicit_terms(prev, doping, params, dealiased);
  const auto ex_curr = explicit_terms(curr, doping, params, dealiased);
  std::optional<NpnsTendency> f;
  if (forcing) f = prepared_forcing(forcing, curr.t + dt, dealiased);
  auto next = advance(curr, &prev, ex_curr, &ex_prev, dt, params, f ? &*f : nullptr);
  if (detail::exceeds(next.n, kBlowUpLimit) || detail::exceeds(next.p, kBlowUpLimit) ||
      detail::exceeds(next.v, kBlowUpLimit)) {
    throw SolverError(ErrorCode::BlowUp, "field magnitude exceeded 1e6 at t = " + std::to_string(next.t));
  }
  return next;
}

std::vector<double> uniform_snapshot_times(double final_time, int count) {
  std::vector<double> t;
  if (count <= 0 || final_time <= 0.0) return {0.0};
  for (int k = 0; k <= count; ++k) t.push_back(final_time * k / count);
  return t;
}

double aligned_step(double target, double final_time, const std::vector<double>& snapshot_times) {
  if (!(target > 0.0)) throw SolverError(ErrorCode::InvalidArgument, "step must be positive");
  if (final_time <= 0.0) return target;
  std::vector<double> points{0.0, final_time};
  for (double t : snapshot_times) {
    if (t < 0.0 || t > final_time * (1.0 + 1e-12)) {
      throw SolverError(ErrorCode::InvalidArgument, "snapshot time outside [0, T]");
    }
    points.push_back(t);
  }
  std::sort(points.begin(), points.end());
  double gap = final_time;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d = points[i] - points[i - 1];
    if (d > 1e-12 * final_time) gap = std::min(gap, d);
  }
  const double m = std::ceil(gap / target - 1e-9);
  const double dt = gap / std::max(1.0, m);
  for (double t : points) {
    const double r = t / dt;
    if (std::abs(r - std::round(r)) > 1e-6) {
      throw SolverError(ErrorCode::InvalidArgument,
                        "snapshot times are not commensurate with a common step");
    }
  }
  return dt;
}

namespace detail {

// Shared by both run loops: step index of every snapshot.
std::vector<long> snapshot_steps(const std::vector<double>& times, double dt) {
  std::vector<long> steps;
  for (double t : times) steps.push_back(std::lround(t / dt));
  if (!std::is_sorted(steps.begin(), steps.end())) {
    throw SolverError(ErrorCode::InvalidArgument, "snapshot times must be sorted");
  }
  return steps;
}

}  // namespace detail

NpnsTrajectory run_npns(const NpnsState& initial, const ScalarField& doping, const Params& params,
                        const RunOptions& options, const NpnsForcing& forcing) {
  validate_params(params, true);
  const auto& ctl = options.control;
  const double target = ctl.fixed_dt ? ctl.dt : stable_dt(initial, doping, params, ctl);
  NpnsTrajectory traj;
  traj.dt = aligned_step(target, options.final_time, options.snapshot_times);
  const double dt = traj.dt;
  const long nsteps = options.final_time > 0.0 ? std::lround(options.final_time / dt) : 0;
  const auto snap_steps = detail::snapshot_steps(options.snapshot_times, dt);

  NpnsState curr = initial;
  std::optional<NpnsState> prev;
  std::optional<ExplicitTerms> ex_prev;
  std::size_t next_snap = 0;
  bool warned = false;

  for (long step = 0;; ++step) {
    auto ex = explicit_terms(curr, doping, params, ctl.dealias);
    if (options.record_steps) traj.steps.push_back(make_record(curr, doping, params, ex.poisson));
    while (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
      NpnsSnapshot snap;
      snap.t = options.snapshot_times[next_snap];
      snap.state = curr;
      snap.state.t = snap.t;
      snap.poisson = ex.poisson;
      snap.tendency = full_rhs(curr, ex, params);
      traj.snapshots.push_back(std::move(snap));
      ++next_snap;
    }
    if (step >= nsteps) break;

    std::optional<NpnsTendency> f;
    if (forcing) f = prepared_forcing(forcing, (step + 1) * dt, ctl.dealias);
    NpnsState next = advance(curr, prev ? &*prev : nullptr, ex, ex_prev ? &*ex_prev : nullptr, dt,
                             params, f ? &*f : nullptr);
    next.t = (step + 1) * dt;

    std::optional<RunFailure> failure;
    if (detail::exceeds(next.n, kBlowUpLimit) || detail::exceeds(next.p, kBlowUpLimit) ||
        detail::exceeds(next.v, kBlowUpLimit)) {
      failure = RunFailure{ErrorCode::BlowUp, "field magnitude exceeded 1e6 at t = " + std::to_string(next.t)};
    } else {
      const double lo = std::min(next.n.min(), next.p.min());
      if (lo < kNegativeDensityAbort) {
        failure = RunFailure{ErrorCode::NegativeDensity,
                             "density " + std::to_string(lo) + " at t = " + std::to_string(next.t)};
      } else if (lo <= 0.0 && traj.warnings.size() < kMaxWarnings) {
        if (!warned) traj.warnings.push_back("NegativeDensity: min density " + std::to_string(lo) +
                                             " at t = " + std::to_string(next.t));
        warned = true;
      }
    }
    if (failure) {
      if (options.throw_on_failure) throw SolverError(failure->code, failure->message);
      traj.failure = std::move(failure);
      break;
    }
    prev = std::move(curr);
    ex_prev = std::move(ex);
    curr = std::move(next);
  }
  return traj;
}

}  // namespace eldiff
