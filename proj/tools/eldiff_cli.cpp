// eldiff: runs the Debye-length system, its quasineutral limit, comparisons,
// lambda sweeps and manufactured-solution studies from a config file.
//
// Exit codes: 0 success, 1 I/O or unexpected error, 2 solver failure,
// 3 configuration error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "eldiff/config.hpp"
#include "eldiff/errors.hpp"
#include "eldiff/harness.hpp"
#include "eldiff/io.hpp"

namespace fs = std::filesystem;
using namespace eldiff;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitSolver = 2;
constexpr int kExitConfig = 3;

struct Common {
  std::string config;
  std::string out;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

std::string snapshot_name(const std::string& prefix, std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%03zu.bin", k);
  return prefix + buf;
}

void add_vector(std::vector<std::pair<std::string, const ScalarField*>>& out, const VectorField& v,
                const char* stem) {
  static const char* axes[3] = {"x", "y", "z"};
  for (int i = 0; i < v.dim(); ++i) out.emplace_back(std::string(stem) + "_" + axes[i], &v[i]);
}

int cmd_simulate(const Common& c, std::optional<double> lambda_opt, bool snapshots) {
  const auto cfg = load(c);
  const double lambda = lambda_opt.value_or(cfg.lambdas.front());
  if (!(lambda > 0.0)) throw ConfigError("--lambda must be positive");
  const auto scenario = build_scenario(cfg);
  const auto traj = run_npns_scenario(cfg, scenario, lambda);
  const std::string tag = lambda_tag(lambda);
  write_csv(cfg.output_dir / ("npns_steps_lambda_" + tag + ".csv"), step_table(traj.steps));
  if (snapshots) {
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const auto& s = traj.snapshots[k];
      std::vector<std::pair<std::string, const ScalarField*>> fields{
          {"n", &s.state.n}, {"p", &s.state.p}, {"phi", &s.poisson.potential}};
      add_vector(fields, s.state.v, "v");
      write_snapshot(cfg.output_dir / snapshot_name("npns_lambda_" + tag, k), make_snapshot(fields));
    }
  }
  for (const auto& w : traj.warnings) std::cerr << "warning: " << w << '\n';
  std::printf("lambda %s: dt %.6g, %zu steps, %zu snapshots -> %s\n", tag.c_str(), traj.dt,
              traj.steps.size(), traj.snapshots.size(), cfg.output_dir.string().c_str());
  if (traj.failure) {
    std::cerr << "solver failure: " << traj.failure->message << '\n';
    return kExitSolver;
  }
  return 0;
}

int cmd_limit(const Common& c, bool snapshots) {
  const auto cfg = load(c);
  const auto scenario = build_scenario(cfg);
  const auto traj = run_limit_scenario(cfg, scenario);
  write_csv(cfg.output_dir / "limit_steps.csv", step_table(traj.steps));
  if (snapshots) {
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const auto& s = traj.snapshots[k];
      std::vector<std::pair<std::string, const ScalarField*>> fields{
          {"z", &s.state.z}, {"n", &s.n}, {"p", &s.p}, {"phi", &s.potential.potential}};
      add_vector(fields, s.state.v, "v");
      write_snapshot(cfg.output_dir / snapshot_name("limit", k), make_snapshot(fields));
    }
  }
  for (const auto& w : traj.warnings) std::cerr << "warning: " << w << '\n';
  std::printf("limit: dt %.6g, %zu steps, %zu snapshots -> %s\n", traj.dt, traj.steps.size(),
              traj.snapshots.size(), cfg.output_dir.string().c_str());
  return 0;
}

void print_rows(const ComparisonResult& r) {
  std::printf("%-8s %-14s %-14s %-14s %-14s\n", "t", "gamma", "norm_sum", "h1_error", "triple_sq");
  for (const auto& row : r.rows) {
    std::printf("%-8.4g %-14.6e %-14.6e %-14.6e %-14.6e\n", row.t, row.gamma, row.norms.sum,
                row.h1_error, row.triple_norm_sq);
  }
}

int cmd_compare(const Common& c, std::optional<double> lambda_opt) {
  const auto cfg = load(c);
  const double lambda = lambda_opt.value_or(cfg.lambdas.front());
  if (!(lambda > 0.0)) throw ConfigError("--lambda must be positive");
  const auto result = run_comparison(cfg, lambda);
  emit_comparison(cfg.output_dir, result);
  std::printf("lambda %s (dt %.6g)\n", lambda_tag(lambda).c_str(), result.npns_dt);
  print_rows(result);
  if (result.failure) {
    std::cerr << "solver failure: " << result.failure->message << '\n';
    return kExitSolver;
  }
  return 0;
}

void print_fit(const char* name, const std::optional<RateFit>& f) {
  if (f) {
    std::printf("%-12s slope %.4f  intercept %.4f  r^2 %.6f\n", name, f->slope, f->intercept, f->r_squared);
  } else {
    std::printf("%-12s (no fit)\n", name);
  }
}

int cmd_sweep(const Common& c, bool serial) {
  const auto cfg = load(c);
  const auto sweep = run_sweep(cfg, !serial);
  emit_sweep(cfg.output_dir, sweep);
  std::printf("%-8s %-10s %-14s %-14s %-14s\n", "lambda", "dt", "sup_norm_sum", "sup_gamma", "sup_h1");
  for (const auto& r : sweep.comparisons) {
    std::printf("%-8s %-10.4g %-14.6e %-14.6e %-14.6e%s\n", lambda_tag(r.lambda).c_str(), r.npns_dt,
                r.sup_norm_sum(), r.sup_gamma(), r.sup_h1_error(), r.failure ? "  FAILED" : "");
  }
  print_fit("norm_sum", sweep.norm_sum_fit);
  print_fit("gamma", sweep.gamma_fit);
  print_fit("h1_error", sweep.h1_fit);
  for (const auto& n : sweep.notes) std::cerr << "note: " << n << '\n';
  for (const auto& r : sweep.comparisons) {
    if (r.failure) return kExitSolver;
  }
  return 0;
}

int cmd_mms(const Common& c, const std::string& system, const std::string& kind) {
  const auto cfg = load(c);
  std::vector<MmsSystem> systems;
  if (system == "npns" || system == "both") systems.push_back(MmsSystem::Npns);
  if (system == "limit" || system == "both") systems.push_back(MmsSystem::Limit);
  std::vector<MmsKind> kinds;
  if (kind == "temporal" || kind == "both") kinds.push_back(MmsKind::Temporal);
  if (kind == "spatial" || kind == "both") kinds.push_back(MmsKind::Spatial);
  for (auto s : systems) {
    for (auto k : kinds) {
      const auto study = run_mms(cfg.mms, s, k, cfg.dim, cfg.mu);
      const std::string name = std::string("mms_") + to_string(s) + "_" + to_string(k);
      write_csv(cfg.output_dir / (name + ".csv"), mms_table(study));
      std::printf("%s\n  %-4s %-10s %-14s %-10s %-8s\n", name.c_str(), "n", "dt", "max_error", "ratio", "order");
      for (const auto& r : study.rows) {
        std::printf("  %-4d %-10.4g %-14.6e %-10.4g %-8.4f\n", r.n, r.dt, r.error, r.ratio, r.order);
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Debye-length / quasineutral comparison lab"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory (overrides config and environment)");
  };

  std::optional<double> lambda;
  bool snapshots = false;
  bool serial = false;
  std::string mms_system = "both";
  std::string mms_kind = "both";

  auto* simulate = app.add_subcommand("simulate", "integrate the Debye-length system for one lambda");
  add_common(simulate);
  simulate->add_option("--lambda", lambda, "Debye length (default: first configured)");
  simulate->add_flag("--snapshots", snapshots, "write binary field snapshots");

  auto* limit = app.add_subcommand("limit", "integrate the quasineutral limit system");
  add_common(limit);
  limit->add_flag("--snapshots", snapshots, "write binary field snapshots");

  auto* compare = app.add_subcommand("compare", "error functionals for one lambda");
  add_common(compare);
  compare->add_option("--lambda", lambda, "Debye length (default: first configured)");

  auto* sweep = app.add_subcommand("sweep", "all configured lambdas with rate fits");
  add_common(sweep);
  sweep->add_flag("--serial", serial, "run the lambdas one after another");

  auto* mms = app.add_subcommand("mms", "manufactured-solution convergence studies");
  add_common(mms);
  mms->add_option("--system", mms_system, "npns, limit or both")
      ->check(CLI::IsMember({"npns", "limit", "both"}));
  mms->add_option("--kind", mms_kind, "temporal, spatial or both")
      ->check(CLI::IsMember({"temporal", "spatial", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(common, lambda, snapshots);
    if (*limit) return cmd_limit(common, snapshots);
    if (*compare) return cmd_compare(common, lambda);
    if (*sweep) return cmd_sweep(common, serial);
    if (*mms) return cmd_mms(common, mms_system, mms_kind);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
