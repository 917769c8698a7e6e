#include "eldiff/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>

#include "json.hpp"

#include "eldiff/errors.hpp"
#include "eldiff/mms.hpp"

namespace eldiff {

Scenario build_scenario(const ExperimentConfig& c) {
  validate_config(c);
  Scenario s;
  s.grid = make_grid(c.dim, c.n);
  s.doping = build_profile(s.grid, c.doping);
  s.limit0.z = build_profile(s.grid, c.z0);
  std::vector<ScalarField> v;
  for (int i = 0; i < c.dim; ++i) v.push_back(build_profile(s.grid, c.v0[i]));
  s.limit0.v = leray_project(VectorField(std::move(v)));
  s.snapshot_times = uniform_snapshot_times(c.final_time, c.snapshots);
  return s;
}

LimitTrajectory run_limit_scenario(const ExperimentConfig& c, const Scenario& s) {
  RunOptions opts;
  opts.final_time = c.final_time;
  opts.snapshot_times = s.snapshot_times;
  opts.control = c.limit_control();
  // The limit is the reference for every lambda: failures are fatal.
  opts.throw_on_failure = true;
  EllipticOptions elliptic;
  elliptic.kappa0 = c.kappa0;
  return run_limit(s.limit0, s.doping, c.params(0.0), opts, {}, elliptic);
}

NpnsTrajectory run_npns_scenario(const ExperimentConfig& c, const Scenario& s, double lambda) {
  const Params params = c.params(lambda);
  const NpnsState initial = well_prepared_initial(s.limit0, s.doping, params);
  RunOptions opts;
  opts.final_time = c.final_time;
  opts.snapshot_times = s.snapshot_times;
  opts.control = c.npns_control();
  opts.throw_on_failure = false;
  return run_npns(initial, s.doping, params, opts);
}

double ComparisonResult::sup_norm_sum() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.norms.sum);
  return m;
}

double ComparisonResult::sup_gamma() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.gamma);
  return m;
}

double ComparisonResult::sup_h1_error() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.h1_error);
  return m;
}

ComparisonResult compare_trajectories(const LimitTrajectory& limit, const NpnsTrajectory& npns,
                                      double lambda) {
  ComparisonResult out;
  out.lambda = lambda;
  out.npns_dt = npns.dt;
  out.limit_dt = limit.dt;
  out.failure = npns.failure;
  out.warnings = npns.warnings;
  if (npns.snapshots.size() > limit.snapshots.size()) {
    throw SolverError(ErrorCode::MisalignedSnapshots, "lambda run has more snapshots than the limit run");
  }
  out.ratio_min = INFINITY;
  out.ratio_max = -INFINITY;
  for (std::size_t i = 0; i < npns.snapshots.size(); ++i) {
    const ErrorBundle b = make_error_bundle(npns.snapshots[i], limit.snapshots[i], lambda);
    out.rows.push_back(error_norm_row(b));
    const auto reg = check_elliptic_regularity(b);
    out.regularity.holds = out.regularity.holds && reg.holds;
    out.regularity.worst_ratio = std::max(out.regularity.worst_ratio, reg.worst_ratio);
    const double ratio = norm_equivalence_ratio(b);
    if (!std::isnan(ratio)) {
      out.ratio_min = std::min(out.ratio_min, ratio);
      out.ratio_max = std::max(out.ratio_max, ratio);
    }
    out.max_identity_residual = std::max(out.max_identity_residual, b.identity_residual);
    if (l2_norm(b.e) > 0.0) out.max_curl_defect = std::max(out.max_curl_defect, curl_free_defect(b.e));
    if (l2_norm(b.e_t) > 0.0) out.max_curl_defect = std::max(out.max_curl_defect, curl_free_defect(b.e_t));
  }
  if (out.ratio_min > out.ratio_max) out.ratio_min = out.ratio_max = NAN;
  return out;
}

ComparisonResult run_comparison(const ExperimentConfig& c, const Scenario& s,
                                const LimitTrajectory& limit, double lambda) {
  return compare_trajectories(limit, run_npns_scenario(c, s, lambda), lambda);
}

ComparisonResult run_comparison(const ExperimentConfig& c, double lambda) {
  const Scenario s = build_scenario(c);
  const LimitTrajectory limit = run_limit_scenario(c, s);
  return run_comparison(c, s, limit, lambda);
}

RateFit fit_power_law(const std::vector<double>& lambdas, const std::vector<double>& values) {
  if (lambdas.size() != values.size()) throw SolverError(ErrorCode::InvalidArgument, "rate fit size mismatch");
  if (lambdas.size() < 3) {
    throw SolverError(ErrorCode::InsufficientData, "rate fit needs at least 3 points, got " +
                                                       std::to_string(lambdas.size()));
  }
  const std::size_t m = lambdas.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(lambdas[i] > 0.0) || !(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw SolverError(ErrorCode::InvalidArgument, "rate fit needs positive finite data");
    }
    x[i] = std::log(lambdas[i]);
    y[i] = std::log(values[i]);
  }
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= m;
  ym /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  if (sxx == 0.0) throw SolverError(ErrorCode::InvalidArgument, "rate fit needs distinct lambdas");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.lambdas = lambdas;
  fit.values = values;
  return fit;
}

SweepResult run_sweep(const ExperimentConfig& c, bool parallel) {
  const Scenario s = build_scenario(c);
  const LimitTrajectory limit = run_limit_scenario(c, s);

  SweepResult out;
  if (parallel) {
    std::vector<std::future<ComparisonResult>> jobs;
    for (double lambda : c.lambdas) {
      jobs.push_back(std::async(std::launch::async,
                                [&c, &s, &limit, lambda] { return run_comparison(c, s, limit, lambda); }));
    }
    for (auto& j : jobs) out.comparisons.push_back(j.get());
  } else {
    for (double lambda : c.lambdas) out.comparisons.push_back(run_comparison(c, s, limit, lambda));
  }

  std::vector<double> lambdas, norm_sum, gamma, h1;
  for (const auto& r : out.comparisons) {
    if (r.failure) {
      out.notes.push_back("lambda = " + lambda_tag(r.lambda) + " excluded: " + r.failure->message);
      continue;
    }
    lambdas.push_back(r.lambda);
    norm_sum.push_back(r.sup_norm_sum());
    gamma.push_back(r.sup_gamma());
    h1.push_back(r.sup_h1_error());
  }
  auto try_fit = [&](const std::vector<double>& v, const char* name) -> std::optional<RateFit> {
    try {
      return fit_power_law(lambdas, v);
    } catch (const SolverError& e) {
      out.notes.push_back(std::string(name) + " fit skipped: " + e.what());
      return std::nullopt;
    }
  };
  out.norm_sum_fit = try_fit(norm_sum, "norm_sum");
  out.gamma_fit = try_fit(gamma, "gamma");
  out.h1_fit = try_fit(h1, "h1_error");
  return out;
}

const char* to_string(MmsSystem system) { return system == MmsSystem::Npns ? "npns" : "limit"; }
const char* to_string(MmsKind kind) { return kind == MmsKind::Temporal ? "temporal" : "spatial"; }

double mms_error(MmsSystem system, MmsKind kind, int dim, int n, double dt, double lambda,
                 double final_time, double mu) {
  const GridPtr grid = make_grid(dim, n);
  Params params;
  params.lambda = lambda;
  params.mu = mu;
  params.dim = dim;
  RunOptions opts;
  opts.final_time = final_time;
  opts.snapshot_times = {0.0, final_time};
  opts.control.dt = dt;
  opts.control.fixed_dt = true;
  opts.record_steps = false;

  auto max_diff = [](const VectorField& a, const VectorField& b) { return (a - b).max_abs(); };
  if (system == MmsSystem::Npns) {
    const auto sol = kind == MmsKind::Temporal ? mms::npns_temporal() : mms::npns_spatial();
    const auto traj = run_npns(mms::npns_exact(grid, sol, params, 0.0), mms::npns_doping(grid, sol),
                               params, opts, mms::npns_forcing(grid, sol, params));
    const auto& got = traj.snapshots.back().state;
    const auto want = mms::npns_exact(grid, sol, params, final_time);
    return std::max({(got.n - want.n).max_abs(), (got.p - want.p).max_abs(), max_diff(got.v, want.v)});
  }
  const auto sol = kind == MmsKind::Temporal ? mms::limit_temporal() : mms::limit_spatial();
  const auto traj = run_limit(mms::limit_exact(grid, sol, dim, 0.0), mms::limit_doping(grid, sol), params,
                              opts, mms::limit_forcing(grid, sol, params));
  const auto& got = traj.snapshots.back().state;
  const auto want = mms::limit_exact(grid, sol, dim, final_time);
  return std::max((got.z - want.z).max_abs(), max_diff(got.v, want.v));
}

MmsStudy run_mms(const MmsConfig& cfg, MmsSystem system, MmsKind kind, int dim, double mu) {
  MmsStudy study;
  study.system = system;
  study.kind = kind;
  std::vector<std::pair<int, double>> runs;
  if (kind == MmsKind::Temporal) {
    for (double dt : cfg.dts) runs.emplace_back(cfg.n, dt);
  } else {
    for (int n : cfg.grid_sizes) runs.emplace_back(n, cfg.spatial_dt);
  }
  for (const auto& [n, dt] : runs) {
    MmsRow row;
    row.n = n;
    row.dt = dt;
    row.error = mms_error(system, kind, dim, n, dt, cfg.lambda, cfg.final_time, mu);
    if (!study.rows.empty()) {
      const auto& prev = study.rows.back();
      row.ratio = prev.error / row.error;
      const double step_ratio = kind == MmsKind::Temporal ? prev.dt / dt : static_cast<double>(n) / prev.n;
      row.order = std::log(row.ratio) / std::log(step_ratio);
    }
    study.rows.push_back(row);
  }
  return study;
}

Table functional_table(const ComparisonResult& result) {
  Table t;
  t.columns = functional_columns();
  for (const auto& r : result.rows) t.rows.push_back(functional_values(r));
  return t;
}

Table step_table(const std::vector<StepRecord>& steps) {
  Table t;
  t.columns = {"t", "mean_n", "mean_p", "mean_z", "norm_n", "norm_p", "norm_v", "min_n", "min_p",
               "residual", "div_v"};
  for (const auto& s : steps) {
    t.rows.push_back({s.t, s.mean_n, s.mean_p, s.mean_z, s.norm_n, s.norm_p, s.norm_v, s.min_n, s.min_p,
                      s.residual, s.div_v});
  }
  return t;
}

Table mms_table(const MmsStudy& study) {
  Table t;
  t.columns = {"n", "dt", "max_error", "ratio", "observed_order"};
  for (const auto& r : study.rows) t.rows.push_back({double(r.n), r.dt, r.error, r.ratio, r.order});
  return t;
}

std::string lambda_tag(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lambda);
  return buf;
}

std::string sweep_summary_json(const SweepResult& sweep) {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json per = ordered_json::array();
  for (const auto& r : sweep.comparisons) {
    ordered_json e;
    e["lambda"] = r.lambda;
    e["npns_dt"] = r.npns_dt;
    e["rows"] = r.rows.size();
    e["sup_norm_sum"] = r.sup_norm_sum();
    e["sup_gamma"] = r.sup_gamma();
    e["sup_h1_error"] = r.sup_h1_error();
    e["regularity_holds"] = r.regularity.holds;
    e["norm_ratio_min"] = r.ratio_min;
    e["norm_ratio_max"] = r.ratio_max;
    e["failure"] = r.failure ? ordered_json(r.failure->message) : ordered_json(nullptr);
    per.push_back(std::move(e));
  }
  j["runs"] = std::move(per);
  auto fit_json = [](const std::optional<RateFit>& f) {
    if (!f) return ordered_json(nullptr);
    ordered_json o;
    o["slope"] = f->slope;
    o["intercept"] = f->intercept;
    o["r_squared"] = f->r_squared;
    o["lambdas"] = f->lambdas;
    o["sup_values"] = f->values;
    return o;
  };
  j["fits"]["norm_sum"] = fit_json(sweep.norm_sum_fit);
  j["fits"]["gamma"] = fit_json(sweep.gamma_fit);
  j["fits"]["h1_error"] = fit_json(sweep.h1_fit);
  j["notes"] = sweep.notes;
  return j.dump(2) + "\n";
}

void emit_comparison(const std::filesystem::path& dir, const ComparisonResult& result) {
  write_csv(dir / ("functionals_lambda_" + lambda_tag(result.lambda) + ".csv"), functional_table(result));
}

void emit_sweep(const std::filesystem::path& dir, const SweepResult& sweep) {
  for (const auto& r : sweep.comparisons) emit_comparison(dir, r);
  write_text(dir / "sweep_summary.json", sweep_summary_json(sweep));
}

}  // namespace eldiff
