#include "eldiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "eldiff/errors.hpp"

namespace eldiff {

namespace {

double sq(double x) { return x * x; }

double norm_sq(const ScalarField& f) { return sq(l2_norm(f)); }
double norm_sq(const VectorField& f) { return sq(l2_norm(f)); }
double h_sq(const ScalarField& f, int s) { return sq(sobolev_norm(f, s)); }
double h_sq(const VectorField& f, int s) { return sq(sobolev_norm(f, s)); }

// ||grad f||^2 for scalars; the full gradient tensor for vectors.
double grad_sq(const ScalarField& f) { return norm_sq(gradient(f)); }
double grad_sq(const VectorField& f) {
  double s = 0.0;
  for (const auto& c : f.components()) s += grad_sq(c);
  return s;
}

}  // namespace

VectorField limit_field_rate(const LimitSnapshot& snap) {
  const auto& e = snap.field_stencil;
  const double h = snap.stencil_spacing;
  if (!(h > 0.0)) throw SolverError(ErrorCode::MisalignedSnapshots, "stencil spacing not set");
  switch (snap.stencil) {
    case StencilKind::Centered:
      if (e.size() < 2) break;
      return (0.5 / h) * (e[1] - e[0]);
    case StencilKind::Forward:
      if (e.size() >= 3) return (0.5 / h) * (-3.0 * e[0] + 4.0 * e[1] - e[2]);
      if (e.size() == 2) return (1.0 / h) * (e[1] - e[0]);
      break;
    case StencilKind::Backward:
      if (e.size() >= 3) return (0.5 / h) * (3.0 * e[0] - 4.0 * e[1] + e[2]);
      if (e.size() == 2) return (1.0 / h) * (e[0] - e[1]);
      break;
  }
  throw SolverError(ErrorCode::MisalignedSnapshots,
                    "incomplete time-derivative stencil at t = " + std::to_string(snap.t));
}

ErrorBundle make_error_bundle(const NpnsSnapshot& npns, const LimitSnapshot& limit, double lambda) {
  if (std::abs(npns.t - limit.t) > 1e-12 * std::max(1.0, std::abs(npns.t))) {
    throw SolverError(ErrorCode::MisalignedSnapshots,
                      "snapshot times differ: " + std::to_string(npns.t) + " vs " + std::to_string(limit.t));
  }
  if (npns.state.n.grid_ptr() != limit.state.z.grid_ptr()) {
    throw SolverError(ErrorCode::MisalignedSnapshots, "snapshots live on different grids");
  }
  if (!(lambda > 0.0)) throw SolverError(ErrorCode::LambdaZero, "error bundle needs lambda > 0");

  const double l2 = lambda * lambda;
  ErrorBundle b;
  b.t = npns.t;
  b.lambda = lambda;
  b.n = npns.state.n - limit.n;
  b.p = npns.state.p - limit.p;
  b.z = b.n + b.p;
  b.v = npns.state.v - limit.state.v;
  b.e = npns.poisson.field - limit.potential.field;

  // Limit densities move with Z: n_t = p_t = Z_t / 2 since D is static.
  const ScalarField half_zt = 0.5 * limit.tendency.dz_dt;
  b.n_t = npns.tendency.dn_dt - half_zt;
  b.p_t = npns.tendency.dp_dt - half_zt;
  b.z_t = b.n_t + b.p_t;
  b.v_t = npns.tendency.dv_dt - limit.tendency.dv_dt;

  // lambda^2 Lap Phi_t = n_t - p_t, E_t = -grad Phi_t.
  const ScalarField phi_t =
      inverse_laplacian_mean_free((1.0 / l2) * (npns.tendency.dn_dt - npns.tendency.dp_dt));
  b.e_t = -gradient(phi_t) - limit_field_rate(limit);

  const ScalarField div_total = divergence(b.e) + divergence(limit.potential.field);
  const ScalarField n_from_z = 0.5 * (b.z - l2 * div_total);
  const ScalarField p_from_z = 0.5 * (b.z + l2 * div_total);
  b.identity_residual = std::max(l2_norm(b.n - n_from_z), l2_norm(b.p - p_from_z));
  return b;
}

ErrorBundle zero_bundle(const GridPtr& grid, double lambda) {
  ErrorBundle b;
  b.lambda = lambda;
  b.z = b.n = b.p = b.z_t = b.n_t = b.p_t = ScalarField::zeros(grid);
  b.v = b.e = b.v_t = b.e_t = VectorField::zeros(grid);
  return b;
}

ErrorBundle scale_bundle(const ErrorBundle& in, double c) {
  ErrorBundle b = in;
  b.z *= c;
  b.n *= c;
  b.p *= c;
  b.v *= c;
  b.e *= c;
  b.z_t *= c;
  b.n_t *= c;
  b.p_t *= c;
  b.v_t *= c;
  b.e_t *= c;
  b.identity_residual = std::abs(c) * in.identity_residual;
  return b;
}

double gamma_functional(const ErrorBundle& b) {
  const double l2 = b.lambda * b.lambda;
  const double z_part = norm_sq(b.z) + grad_sq(b.z) + norm_sq(laplacian(b.z)) + norm_sq(b.z_t) +
                        grad_sq(b.z_t);
  const double v_part = norm_sq(b.v) + grad_sq(b.v) + norm_sq(laplacian(b.v)) + norm_sq(b.v_t) +
                        grad_sq(b.v_t);
  const ScalarField div_e = divergence(b.e);
  const double e_weighted = norm_sq(b.e) + norm_sq(div_e) + norm_sq(gradient(div_e)) +
                            norm_sq(b.e_t) + norm_sq(divergence(b.e_t));
  return z_part + v_part + l2 * e_weighted + norm_sq(b.e) + norm_sq(div_e);
}

double g_dissipation(const ErrorBundle& b) {
  const double l2 = b.lambda * b.lambda;
  const ScalarField div_et = divergence(b.e_t);
  return norm_sq(laplacian(b.z_t)) + norm_sq(laplacian(b.v_t)) + norm_sq(b.e_t) + norm_sq(div_et) +
         l2 * norm_sq(gradient(div_et));
}

double triple_norm_sq(const ErrorBundle& b) {
  const double l2 = b.lambda * b.lambda;
  return h_sq(b.z, 2) + l2 * h_sq(b.e, 2) + h_sq(b.v, 2) + h_sq(b.z_t, 1) + l2 * h_sq(b.e_t, 1) +
         h_sq(b.v_t, 1) + h_sq(b.e, 1);
}

ErrorNorms error_norms(const ErrorBundle& b) {
  ErrorNorms t;
  t.state_h1 = std::sqrt(h_sq(b.n, 1) + h_sq(b.p, 1) + h_sq(b.e, 1) + h_sq(b.v, 1));
  t.rate_l2 = std::sqrt(norm_sq(b.n_t) + norm_sq(b.p_t) + norm_sq(b.v_t));
  t.lambda_field_h2 = b.lambda * sobolev_norm(b.e, 2);
  t.lambda_rate_h1 = b.lambda * sobolev_norm(b.e_t, 1);
  t.sum = t.state_h1 + t.rate_l2 + t.lambda_field_h2 + t.lambda_rate_h1;
  return t;
}

const std::vector<std::string>& functional_columns() {
  static const std::vector<std::string> cols{
      "t",           "gamma",         "g_dissipation",   "triple_norm_sq",
      "h1_error",    "err_state_h1",  "err_rate_l2",     "lambda_err_field_h2",
      "lambda_err_field_rate_h1",     "norm_sum",     "identity_residual"};
  return cols;
}

std::vector<double> functional_values(const FunctionalRow& r) {
  return {r.t,
          r.gamma,
          r.g,
          r.triple_norm_sq,
          r.h1_error,
          r.norms.state_h1,
          r.norms.rate_l2,
          r.norms.lambda_field_h2,
          r.norms.lambda_rate_h1,
          r.norms.sum,
          r.identity_residual};
}

FunctionalRow error_norm_row(const ErrorBundle& b) {
  FunctionalRow row;
  row.t = b.t;
  row.gamma = gamma_functional(b);
  row.g = g_dissipation(b);
  row.triple_norm_sq = triple_norm_sq(b);
  row.h1_error = std::sqrt(h_sq(b.n, 1) + h_sq(b.p, 1) + h_sq(b.v, 1));
  row.norms = error_norms(b);
  row.identity_residual = b.identity_residual;
  return row;
}

RegularityReport check_elliptic_regularity(const ErrorBundle& b) {
  RegularityReport rep;
  auto record = [&](double lhs, double rhs) {
    const double bound = 2.0 * rhs;
    if (lhs == 0.0) return;
    const double ratio = bound > 0.0 ? lhs / bound : INFINITY;
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if (lhs > bound * (1.0 + 1e-12)) rep.holds = false;
  };
  record(h_sq(b.z, 2), norm_sq(b.z) + norm_sq(laplacian(b.z)));
  record(h_sq(b.z_t, 2), norm_sq(b.z_t) + norm_sq(laplacian(b.z_t)));
  record(h_sq(b.v, 2), norm_sq(b.v) + norm_sq(laplacian(b.v)));
  record(h_sq(b.v_t, 2), norm_sq(b.v_t) + norm_sq(laplacian(b.v_t)));
  for (const VectorField* f : {&b.e, &b.e_t}) {
    const ScalarField d = divergence(*f);
    record(h_sq(*f, 1), norm_sq(*f) + h_sq(d, 0));
    record(h_sq(*f, 2), norm_sq(*f) + h_sq(d, 1));
  }
  return rep;
}

double norm_equivalence_ratio(const ErrorBundle& b) {
  const double tn = triple_norm_sq(b);
  const double g = gamma_functional(b);
  if (tn == 0.0) return g == 0.0 ? NAN : INFINITY;
  return g / tn;
}

double curl_free_defect(const VectorField& f) {
  const double g = std::sqrt(grad_sq(f));
  const double d = l2_norm(divergence(f));
  const double ref = std::max(g, 1e-300);
  return std::abs(g - d) / ref;
}

}  // namespace eldiff
