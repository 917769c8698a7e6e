#include "eldiff/quasineutral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "imex.hpp"

namespace eldiff {

namespace {

using Coeffs = std::vector<cplx>;

double inner(const Coeffs& a, const Coeffs& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return s;
}

void axpy(double alpha, const Coeffs& x, Coeffs& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// Restricts to the space the operator acts on: mean-zero, nonzero kappa,
// and (when dealiasing) the 2/3 band.
void restrict_to_range(const Grid& g, Coeffs& c, bool dealiased) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.kappa_sq(i) == 0.0 || (dealiased && !g.in_band(i))) c[i] = 0.0;
  }
}

class EllipticOperator {
 public:
  EllipticOperator(const ScalarField& z, bool dealiased)
      : z_(z), grid_(z.grid_ptr()), zbar_(z.mean()), dealiased_(dealiased) {}

  // -div(Z grad phi)
  Coeffs apply(const Coeffs& phi) const {
    const auto f = ScalarField::from_spectral(grid_, phi);
    const auto flux = multiply(z_, gradient(f), dealiased_);
    auto out = divergence(flux);
    Coeffs c(out.coeffs().begin(), out.coeffs().end());
    for (auto& x : c) x = -x;
    restrict_to_range(*grid_, c, dealiased_);
    return c;
  }

  // (-zbar Lap)^{-1}
  Coeffs precondition(const Coeffs& r) const {
    Coeffs c(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double ksq = grid_->kappa_sq(i);
      c[i] = ksq > 0.0 ? r[i] / (zbar_ * ksq) : cplx(0.0, 0.0);
    }
    restrict_to_range(*grid_, c, dealiased_);
    return c;
  }

 private:
  const ScalarField& z_;
  GridPtr grid_;
  double zbar_;
  bool dealiased_;
};

ScalarField limit_source(const ScalarField& doping, const VectorField& v, const ScalarField* source,
                         bool dealiased) {
  ScalarField rhs = laplacian(doping) - divergence(multiply(doping, v, dealiased));
  if (source) rhs += dealiased ? dealias(*source) : *source;
  return rhs;
}

}  // namespace

LimitPotential solve_limit_potential(const ScalarField& z, const ScalarField& doping,
                                     const VectorField& v, const EllipticOptions& options,
                                     const ScalarField* source, const ScalarField* guess) {
  if (z.min() < 0.5 * options.kappa0 || !(z.mean() > 0.0)) {
    throw SolverError(ErrorCode::NonPositiveZ,
                      "min Z = " + std::to_string(z.min()) + " below kappa0/2");
  }
  const auto& g = z.grid();
  const auto grid = z.grid_ptr();
  const EllipticOperator op(z, options.dealias);

  // A phi = b with A = -div(Z grad .), b = -(Lap D - div(D v) + source).
  const auto rhs = limit_source(doping, v, source, options.dealias);
  Coeffs b(rhs.coeffs().begin(), rhs.coeffs().end());
  for (auto& x : b) x = -x;
  restrict_to_range(g, b, options.dealias);
  const double bnorm = std::sqrt(inner(b, b));

  Coeffs x(g.size());
  if (guess != nullptr && bnorm > 0.0) {
    x.assign(guess->coeffs().begin(), guess->coeffs().end());
    restrict_to_range(g, x, options.dealias);
  }

  EllipticSolveReport report;
  auto true_residual = [&](Coeffs& r) {
    r = op.apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return bnorm > 0.0 ? std::sqrt(inner(r, r)) / bnorm : 0.0;
  };

  Coeffs r;
  report.residual = true_residual(r);
  // Restarted PCG: the inner loop follows the recursive residual, the outer
  // loop confirms against the true one.
  while (report.residual > options.tolerance && report.iterations < options.max_iterations) {
    Coeffs zr = op.precondition(r);
    Coeffs p = zr;
    double rz = inner(r, zr);
    while (report.iterations < options.max_iterations) {
      const Coeffs ap = op.apply(p);
      const double pap = inner(p, ap);
      if (!(pap > 0.0)) break;
      const double alpha = rz / pap;
      axpy(alpha, p, x);
      axpy(-alpha, ap, r);
      ++report.iterations;
      if (std::sqrt(inner(r, r)) <= 0.5 * options.tolerance * bnorm) break;
      zr = op.precondition(r);
      const double rz_new = inner(r, zr);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = zr[i] + beta * p[i];
    }
    const double previous = report.residual;
    report.residual = true_residual(r);
    if (report.residual >= previous && report.residual > options.tolerance) break;  // stagnated
  }
  report.converged = report.residual <= options.tolerance;
  if (!report.converged) {
    throw SolverError(ErrorCode::NotConverged,
                      "limit elliptic solve stopped at relative residual " +
                          std::to_string(report.residual) + " after " +
                          std::to_string(report.iterations) + " iterations");
  }
  auto phi = ScalarField::from_spectral(grid, std::move(x));
  auto field = -gradient(phi);
  return {std::move(phi), std::move(field), report};
}

double limit_relation_residual(const ScalarField& z, const ScalarField& doping,
                               const VectorField& v, const VectorField& field,
                               const ScalarField* source, bool dealiased) {
  const ScalarField rhs = limit_source(doping, v, source, dealiased);
  // div(grad D + Z E - D v) + source = div(Z E) + rhs
  const ScalarField residual = divergence(multiply(z, field, dealiased)) + rhs;
  const double ref = l2_norm(rhs);
  const double res = l2_norm(residual);
  return ref > 0.0 ? res / ref : res;
}

LimitTendency limit_rhs_with_field(const LimitState& state, const ScalarField& doping,
                                   const Params& params, const VectorField& field, bool dealiased) {
  ScalarField dz = laplacian(state.z) +
                   divergence(multiply(doping, field, dealiased) - multiply(state.z, state.v, dealiased));
  VectorField dv = leray_project(params.mu * laplacian(state.v) - advect(state.v, state.v, dealiased) -
                                 multiply(doping, field, dealiased));
  return {std::move(dz), std::move(dv)};
}

LimitTendency limit_rhs(const LimitState& state, const ScalarField& doping, const Params& params,
                        const EllipticOptions& options) {
  const auto potential = solve_limit_potential(state.z, doping, state.v, options);
  return limit_rhs_with_field(state, doping, params, potential.field, options.dealias);
}

double stable_dt_limit(const LimitState& state, const VectorField& field, const Params&,
                       const StepControl& control) {
  const double h = state.z.grid().spacing();
  const double speed = std::max({state.v.max_abs(), field.max_abs(), 1e-12});
  return std::max(std::min(control.dt, control.cfl_advect * h / speed), 1e-9);
}

namespace {

struct LimitExplicit {
  ScalarField z;
  VectorField v;
  LimitPotential potential;
};

LimitExplicit limit_explicit(const LimitState& s, const ScalarField& doping,
                             const EllipticOptions& options, const ScalarField* source,
                             const ScalarField* guess) {
  auto potential = solve_limit_potential(s.z, doping, s.v, options, source, guess);
  const auto& e = potential.field;
  const bool d = options.dealias;
  ScalarField dz = divergence(multiply(doping, e, d) - multiply(s.z, s.v, d));
  VectorField dv = leray_project(-advect(s.v, s.v, d) - multiply(doping, e, d));
  return {std::move(dz), std::move(dv), std::move(potential)};
}

LimitForcing prepared_forcing(const LimitForcingFn& forcing, double t, bool dealiased) {
  auto f = forcing(t);
  if (dealiased) {
    f.dz = dealias(f.dz);
    f.dv = dealias(f.dv);
    f.elliptic_source = dealias(f.elliptic_source);
  }
  f.dv = leray_project(f.dv);
  return f;
}

LimitState advance(const LimitState& curr, const LimitState* prev, const LimitExplicit& ex,
                   const LimitExplicit* ex_prev, double dt, const Params& params,
                   const LimitForcing* f) {
  LimitState next;
  next.t = curr.t + dt;
  if (prev == nullptr) {
    next.z = detail::imex_euler(curr.z, ex.z, f ? &f->dz : nullptr, dt, 1.0);
    next.v = detail::imex_euler(curr.v, ex.v, f ? &f->dv : nullptr, dt, params.mu);
  } else {
    next.z = detail::sbdf2(curr.z, prev->z, ex.z, ex_prev->z, f ? &f->dz : nullptr, dt, 1.0);
    next.v = detail::sbdf2(curr.v, prev->v, ex.v, ex_prev->v, f ? &f->dv : nullptr, dt, params.mu);
  }
  next.v = leray_project(next.v);
  return next;
}

EllipticOptions with_kappa(EllipticOptions options, const Params& params) {
  options.kappa0 = params.kappa0;
  return options;
}

}  // namespace

LimitState step_imex_euler_limit(const LimitState& curr, double dt, const ScalarField& doping,
                                 const Params& params, const LimitForcingFn& forcing,
                                 const EllipticOptions& options) {
  validate_params(params, false);
  const auto opts = with_kappa(options, params);
  std::optional<LimitForcing> f0, f1;
  if (forcing) {
    f0 = prepared_forcing(forcing, curr.t, opts.dealias);
    f1 = prepared_forcing(forcing, curr.t + dt, opts.dealias);
  }
  const auto ex = limit_explicit(curr, doping, opts, f0 ? &f0->elliptic_source : nullptr, nullptr);
  return advance(curr, nullptr, ex, nullptr, dt, params, f1 ? &*f1 : nullptr);
}

LimitState step_sbdf_limit(const LimitState& prev, const LimitState& curr, double dt,
                           const ScalarField& doping, const Params& params,
                           const LimitForcingFn& forcing, const EllipticOptions& options) {
  validate_params(params, false);
  const auto opts = with_kappa(options, params);
  std::optional<LimitForcing> fm, f0, f1;
  if (forcing) {
    fm = prepared_forcing(forcing, prev.t, opts.dealias);
    f0 = prepared_forcing(forcing, curr.t, opts.dealias);
    f1 = prepared_forcing(forcing, curr.t + dt, opts.dealias);
  }
  const auto ex_prev = limit_explicit(prev, doping, opts, fm ? &fm->elliptic_source : nullptr, nullptr);
  const auto ex = limit_explicit(curr, doping, opts, f0 ? &f0->elliptic_source : nullptr, nullptr);
  auto next = advance(curr, &prev, ex, &ex_prev, dt, params, f1 ? &*f1 : nullptr);
  if (detail::exceeds(next.z, detail::kBlowUpLimit) || detail::exceeds(next.v, detail::kBlowUpLimit)) {
    throw SolverError(ErrorCode::BlowUp, "field magnitude exceeded 1e6 at t = " + std::to_string(next.t));
  }
  if (next.z.min() < 0.5 * params.kappa0) {
    throw SolverError(ErrorCode::NonPositiveZ, "min Z fell below kappa0/2 at t = " + std::to_string(next.t));
  }
  return next;
}

LimitTrajectory run_limit(const LimitState& initial, const ScalarField& doping,
                          const Params& params, const RunOptions& options,
                          const LimitForcingFn& forcing, const EllipticOptions& elliptic) {
  validate_params(params, false);
  const auto opts = with_kappa(elliptic, params);
  const auto& ctl = options.control;
  const bool d = opts.dealias;

  std::optional<LimitForcing> f_curr;
  if (forcing) f_curr = prepared_forcing(forcing, initial.t, d);

  LimitTrajectory traj;
  auto ex = limit_explicit(initial, doping, opts, f_curr ? &f_curr->elliptic_source : nullptr, nullptr);
  const double target = ctl.fixed_dt ? ctl.dt : stable_dt_limit(initial, ex.potential.field, params, ctl);
  traj.dt = aligned_step(target, options.final_time, options.snapshot_times);
  const double dt = traj.dt;
  const long nsteps = options.final_time > 0.0 ? std::lround(options.final_time / dt) : 0;
  const auto snap_steps = detail::snapshot_steps(options.snapshot_times, dt);

  LimitState curr = initial;
  std::optional<LimitState> prev;
  std::optional<LimitExplicit> ex_prev;
  std::size_t next_snap = 0;
  bool warned = false;

  // Recent limit fields, newest last, for the E_t stencils.
  std::deque<VectorField> history;
  // Snapshots still waiting for future fields: (snapshot index, fields needed).
  std::vector<std::pair<std::size_t, int>> pending;

  for (long step = 0;; ++step) {
    if (step > 0) {
      const ScalarField* guess = &ex.potential.potential;
      try {
        auto next_ex = limit_explicit(curr, doping, opts, f_curr ? &f_curr->elliptic_source : nullptr, guess);
        ex = std::move(next_ex);
      } catch (const SolverError& e) {
        if (options.throw_on_failure) throw;
        traj.failure = RunFailure{e.code(), e.what()};
        break;
      }
    }
    const auto& field = ex.potential.field;
    history.push_back(field);
    if (history.size() > 3) history.pop_front();
    for (auto it = pending.begin(); it != pending.end();) {
      traj.snapshots[it->first].field_stencil.push_back(field);
      if (--it->second == 0) {
        it = pending.erase(it);
      } else {
        ++it;
      }
    }

    const auto densities = recover_np(curr.z, doping);
    if (options.record_steps) {
      StepRecord r;
      r.t = curr.t;
      r.mean_n = densities.n.mean();
      r.mean_p = densities.p.mean();
      r.mean_z = curr.z.mean();
      r.norm_n = l2_norm(densities.n);
      r.norm_p = l2_norm(densities.p);
      r.norm_v = l2_norm(curr.v);
      r.min_n = densities.n.min();
      r.min_p = densities.p.min();
      r.residual = limit_relation_residual(curr.z, doping, curr.v, field,
                                           f_curr ? &f_curr->elliptic_source : nullptr, d);
      const double nv = l2_norm(curr.v);
      r.div_v = nv > 0.0 ? l2_norm(divergence(curr.v)) / nv : 0.0;
      traj.steps.push_back(r);
    }
    if (densities.negative_density && !warned) {
      traj.warnings.push_back("NegativeDensity: recovered density nonpositive at t = " +
                              std::to_string(curr.t));
      warned = true;
    }

    while (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
      LimitSnapshot snap;
      snap.t = options.snapshot_times[next_snap];
      snap.state = curr;
      snap.state.t = snap.t;
      snap.potential = ex.potential;
      snap.n = densities.n;
      snap.p = densities.p;
      snap.tendency = limit_rhs_with_field(curr, doping, params, field, d);
      snap.stencil_spacing = dt;
      const std::size_t index = traj.snapshots.size();
      if (step == 0) {
        snap.stencil = StencilKind::Forward;
        snap.field_stencil.push_back(field);
        pending.emplace_back(index, 2);
      } else if (step < nsteps) {
        snap.stencil = StencilKind::Centered;
        snap.field_stencil.push_back(history[history.size() - 2]);
        pending.emplace_back(index, 1);
      } else {
        snap.stencil = StencilKind::Backward;
        for (auto it = history.rbegin(); it != history.rend(); ++it) snap.field_stencil.push_back(*it);
      }
      traj.snapshots.push_back(std::move(snap));
      ++next_snap;
    }
    if (step >= nsteps) break;

    std::optional<LimitForcing> f_next;
    if (forcing) f_next = prepared_forcing(forcing, (step + 1) * dt, d);
    LimitState next = advance(curr, prev ? &*prev : nullptr, ex, ex_prev ? &*ex_prev : nullptr, dt,
                              params, f_next ? &*f_next : nullptr);
    next.t = (step + 1) * dt;

    std::optional<RunFailure> failure;
    if (detail::exceeds(next.z, detail::kBlowUpLimit) || detail::exceeds(next.v, detail::kBlowUpLimit)) {
      failure = RunFailure{ErrorCode::BlowUp, "field magnitude exceeded 1e6 at t = " + std::to_string(next.t)};
    } else if (next.z.min() < 0.5 * params.kappa0) {
      failure = RunFailure{ErrorCode::NonPositiveZ,
                           "min Z = " + std::to_string(next.z.min()) + " below kappa0/2 at t = " +
                               std::to_string(next.t)};
    }
    if (failure) {
      if (options.throw_on_failure) throw SolverError(failure->code, failure->message);
      traj.failure = std::move(failure);
      break;
    }
    prev = std::move(curr);
    ex_prev = ex;
    curr = std::move(next);
    f_curr = std::move(f_next);
  }
  return traj;
}

}  // namespace eldiff
