// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: eldiff_acceptance <config> [output dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>

#include "dense_oracle.hpp"
#include "eldiff/config.hpp"
#include "eldiff/errors.hpp"
#include "eldiff/harness.hpp"
#include "test_support.hpp"

using namespace eldiff;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_seconds > 0 && secs > limit_seconds) {
    out.pass = false;
    out.detail += " (runtime over " + std::to_string(limit_seconds) + " s)";
  }
  if (!out.pass) ++failures;
  std::printf("%s  [%d] %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

Outcome spectral_identities() {
  auto g = make_grid(2, 16);
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    auto f = test::random_field(g, rng, 7, 0.3);
    double phys = 0.0;
    for (double x : f.values()) phys += x * x;
    phys /= static_cast<double>(g->size());
    double spec = 0.0;
    for (auto c : f.coeffs()) spec += std::norm(c);
    worst = std::max(worst, rel(spec, phys));

    worst = std::max(worst, (laplacian(f) - divergence(gradient(f))).max_abs() / laplacian(f).max_abs());

    VectorField u({test::random_field(g, rng, 7), test::random_field(g, rng, 7)});
    auto pu = leray_project(u);
    worst = std::max(worst, (leray_project(pu) - pu).max_abs() / pu.max_abs());
    worst = std::max(worst, leray_project(gradient(f)).max_abs() / gradient(f).max_abs());
    worst = std::max(worst, divergence(pu).max_abs() / u.max_abs());

    auto F = gradient(f);
    const double div_sq = std::pow(l2_norm(divergence(F)), 2);
    worst = std::max(worst, rel(gradient_norm_sq(F), div_sq));
  }
  return {worst <= 1e-12, fmt("worst relative defect %.3e (tol 1e-12)", worst)};
}

Outcome poisson_manufactured() {
  auto g = make_grid(2, 16);
  auto phi = test::from_function(g, [](double x, double y, double) { return std::cos(x) * std::cos(y); });
  double worst = 0.0;
  for (double lambda : {1.0, 0.1}) {
    auto p = ScalarField::constant(g, 1.0);
    auto n = p + (-2.0 * lambda * lambda) * phi;
    auto zero = ScalarField::zeros(g);
    auto sol = solve_poisson(n, p, zero, lambda);
    worst = std::max(worst, poisson_residual(n, p, zero, lambda, sol.potential));
    worst = std::max(worst, l2_norm(sol.potential - phi) / l2_norm(phi));
  }
  return {worst <= 1e-12, fmt("worst relative residual/error %.3e (tol 1e-12)", worst)};
}

Outcome elliptic_oracle() {
  const int n = 16;
  auto g = make_grid(2, n);
  auto z = test::from_function(g, [](double x, double, double) { return 2.0 + 0.3 * std::cos(x); });
  auto d = test::from_function(g, [](double x, double, double) { return 0.1 * std::cos(x); });
  auto sol = solve_limit_potential(z, d, VectorField::zeros(g));
  auto dense = test::dense_limit_solve(n, {{{0, 0}, 2.0}, {{1, 0}, 0.15}, {{-1, 0}, 0.15}},
                                       {{{1, 0}, 0.05}, {{-1, 0}, 0.05}});
  double num = 0.0, den = 0.0;
  for (const auto& [k, want] : dense) {
    const auto got = sol.potential.coeffs()[g->mode_index({k.first, k.second, 0})];
    num += std::norm(got - want);
    den += std::norm(want);
  }
  const double err = std::sqrt(num / den);
  const int it = sol.report.iterations;
  return {err <= 1e-8 && it <= 100 && sol.report.converged,
          fmt("relative error %.3e (tol 1e-8), %g iterations (max 100)", err, it)};
}

Outcome mms_orders(const ExperimentConfig& cfg) {
  bool ok = true;
  std::string detail;
  for (auto sys : {MmsSystem::Npns, MmsSystem::Limit}) {
    auto temporal = run_mms(cfg.mms, sys, MmsKind::Temporal, 2, cfg.mu);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 1; i < temporal.rows.size(); ++i) {
      lo = std::min(lo, temporal.rows[i].order);
      hi = std::max(hi, temporal.rows[i].order);
    }
    ok = ok && temporal.rows.size() >= 2 && lo >= 1.8 && hi <= 2.2;
    auto spatial = run_mms(cfg.mms, sys, MmsKind::Spatial, 2, cfg.mu);
    double worst_ratio = INFINITY;
    for (std::size_t i = 1; i < spatial.rows.size(); ++i) {
      const bool floor = spatial.rows[i - 1].error <= 1e-10;
      if (!floor) worst_ratio = std::min(worst_ratio, spatial.rows[i].ratio);
    }
    ok = ok && spatial.rows.size() >= 2 && worst_ratio >= 10.0;
    detail += std::string(to_string(sys)) + fmt(" order [%.3f, %.3f], min spatial drop %.3g; ", lo, hi, worst_ratio);
  }
  return {ok, detail + "tol order 2+-0.2, drop >= 10 until 1e-10"};
}

Outcome conservation(const ExperimentConfig& cfg) {
  auto scenario = build_scenario(cfg);
  auto limit = run_limit_scenario(cfg, scenario);
  auto npns = run_npns_scenario(cfg, scenario, 0.1);
  if (npns.failure) return {false, "lambda run failed: " + npns.failure->message};
  auto drift = [](const std::vector<StepRecord>& steps, double StepRecord::*m) {
    const double ref = std::max(std::abs(steps.front().*m), 1e-300);
    double w = 0.0;
    for (const auto& s : steps) w = std::max(w, std::abs(s.*m - steps.front().*m) / ref);
    return w;
  };
  const double dn = drift(npns.steps, &StepRecord::mean_n);
  const double dp = drift(npns.steps, &StepRecord::mean_p);
  const double dz = drift(limit.steps, &StepRecord::mean_z);
  double div = 0.0;
  for (const auto& s : npns.snapshots) div = std::max(div, l2_norm(divergence(s.state.v)) / l2_norm(s.state.v));
  for (const auto& s : limit.snapshots) div = std::max(div, l2_norm(divergence(s.state.v)) / l2_norm(s.state.v));
  const double worst_mean = std::max({dn, dp, dz});
  return {worst_mean <= 1e-11 && div <= 1e-10,
          fmt("mean drift n %.2e p %.2e Z %.2e (tol 1e-11); ", dn, dp, dz) +
              fmt("div v %.2e (tol 1e-10)", div)};
}

Outcome inequalities(const SweepResult& sweep) {
  bool ok = true;
  double lo = INFINITY, hi = -INFINITY, worst = 0.0;
  for (const auto& c : sweep.comparisons) {
    ok = ok && c.regularity.holds && !c.rows.empty();
    worst = std::max(worst, c.regularity.worst_ratio);
    lo = std::min(lo, c.ratio_min);
    hi = std::max(hi, c.ratio_max);
  }
  ok = ok && lo >= kNormRatioLower && hi <= kNormRatioUpper;
  return {ok, fmt("regularity worst lhs/(2 rhs) %.3f; norm ratio [%.4f, %.4f]", worst, lo, hi) +
                  fmt(" within [%.3f, %.3f]", kNormRatioLower, kNormRatioUpper)};
}

Outcome rates(const SweepResult& sweep) {
  if (!sweep.norm_sum_fit || !sweep.gamma_fit) return {false, "fits unavailable"};
  const auto& a = *sweep.norm_sum_fit;
  const auto& b = *sweep.gamma_fit;
  bool ok = a.slope >= 0.9 && a.r_squared >= 0.95 && b.slope >= 1.8 && b.r_squared >= 0.95;
  bool monotone = true;
  for (std::size_t i = 1; i < sweep.comparisons.size(); ++i) {
    monotone = monotone && sweep.comparisons[i].sup_h1_error() < sweep.comparisons[i - 1].sup_h1_error();
  }
  return {ok && monotone,
          fmt("norm-sum slope %.3f (r2 %.4f, need >= 0.9 / 0.95); ", a.slope, a.r_squared) +
              fmt("gamma slope %.3f (r2 %.4f, need >= 1.8 / 0.95); ", b.slope, b.r_squared) +
              (monotone ? "h1 error monotone" : "h1 error NOT monotone")};
}

Outcome well_prepared(const ExperimentConfig& cfg) {
  auto scenario = build_scenario(cfg);
  const auto p0 = recover_np(scenario.limit0.z, scenario.doping).p;
  double worst = 0.0;
  for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.lambdas.size(); ++j) {
      auto a = well_prepared_initial(scenario.limit0, scenario.doping, cfg.params(cfg.lambdas[i]));
      auto b = well_prepared_initial(scenario.limit0, scenario.doping, cfg.params(cfg.lambdas[j]));
      const double ratio = l2_norm(a.p - p0) / l2_norm(b.p - p0);
      const double want = std::pow(cfg.lambdas[i] / cfg.lambdas[j], 2);
      worst = std::max(worst, rel(ratio, want));
    }
  }
  return {worst <= 1e-10, fmt("worst relative deviation from (l1/l2)^2: %.3e (tol 1e-10)", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const ExperimentConfig& cfg, const SweepResult& first, const fs::path& out) {
  auto second = run_sweep(cfg, true);
  const auto a = out / "run_a";
  const auto b = out / "run_b";
  emit_sweep(a, first);
  emit_sweep(b, second);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const auto other = b / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
      return {false, "differs: " + entry.path().filename().string()};
    }
  }
  return {files == static_cast<int>(cfg.lambdas.size()), fmt("%g CSV files bit-identical", files)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <config> [output dir]\n", argv[0]);
    return 3;
  }
  ExperimentConfig cfg;
  try {
    cfg = load_config(argv[1]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  }
  const fs::path out = argc > 2 ? fs::path(argv[2]) : fs::path("acceptance_out");
  fs::remove_all(out);

  report(1, "spectral identities", 1.0, spectral_identities);
  report(2, "Poisson manufactured solution", 1.0, poisson_manufactured);
  report(3, "limit elliptic solve vs dense oracle", 0.0, elliptic_oracle);
  report(4, "manufactured solutions", 120.0, [&] { return mms_orders(cfg); });
  report(5, "conservation at lambda = 0.1", 0.0, [&] { return conservation(cfg); });

  SweepResult sweep;
  std::string sweep_error;
  const auto start = std::chrono::steady_clock::now();
  try {
    sweep = run_sweep(cfg, true);
  } catch (const std::exception& e) {
    sweep_error = e.what();
  }
  const double sweep_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("      sweep over %zu lambdas took %.1f s\n", cfg.lambdas.size(), sweep_secs);
  auto guarded = [&](const std::function<Outcome()>& f) {
    return [&, f] { return sweep_error.empty() ? f() : Outcome{false, "sweep failed: " + sweep_error}; };
  };
  report(6, "discrete inequality checks", 0.0, guarded([&] { return inequalities(sweep); }));
  report(7, "quasineutral rates", 0.0, guarded([&] {
           auto o = rates(sweep);
           if (sweep_secs > 600.0) {
             o.pass = false;
             o.detail += " (sweep over 600 s)";
           }
           return o;
         }));
  report(8, "well-prepared data scaling", 0.0, [&] { return well_prepared(cfg); });
  report(9, "determinism", 0.0, guarded([&] { return determinism(cfg, sweep, out); }));

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
