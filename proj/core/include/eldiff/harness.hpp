#pragma once

// Experiment orchestration: single comparisons, lambda sweeps with rate
// fits, manufactured-solution studies, and their file outputs.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eldiff/config.hpp"
#include "eldiff/diagnostics.hpp"
#include "eldiff/io.hpp"
#include "eldiff/npns.hpp"
#include "eldiff/quasineutral.hpp"

namespace eldiff {

struct Scenario {
  GridPtr grid;
  ScalarField doping;
  LimitState limit0;  ///< velocity Leray-projected
  std::vector<double> snapshot_times;
};

Scenario build_scenario(const ExperimentConfig& config);

LimitTrajectory run_limit_scenario(const ExperimentConfig& config, const Scenario& scenario);
/// Well-prepared start; failures are recorded, not thrown.
NpnsTrajectory run_npns_scenario(const ExperimentConfig& config, const Scenario& scenario,
                                 double lambda);

struct ComparisonResult {
  double lambda = 0.0;
  double npns_dt = 0.0;
  double limit_dt = 0.0;
  std::vector<FunctionalRow> rows;
  std::optional<RunFailure> failure;
  std::vector<std::string> warnings;
  RegularityReport regularity;
  double ratio_min = 0.0;  ///< norm-equivalence ratio over the rows
  double ratio_max = 0.0;
  double max_identity_residual = 0.0;
  double max_curl_defect = 0.0;

  double sup_norm_sum() const;
  double sup_gamma() const;
  double sup_h1_error() const;
};

/// Pairs snapshots at equal times; rows cover every snapshot the lambda run
/// reached.
ComparisonResult compare_trajectories(const LimitTrajectory& limit, const NpnsTrajectory& npns,
                                      double lambda);

ComparisonResult run_comparison(const ExperimentConfig& config, double lambda);
ComparisonResult run_comparison(const ExperimentConfig& config, const Scenario& scenario,
                                const LimitTrajectory& limit, double lambda);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> lambdas;
  std::vector<double> values;
};

/// Least squares of log(value) against log(lambda). Throws InsufficientData
/// for fewer than three points and InvalidArgument for non-positive data.
RateFit fit_power_law(const std::vector<double>& lambdas, const std::vector<double>& values);

struct SweepResult {
  std::vector<ComparisonResult> comparisons;  ///< in config lambda order
  std::optional<RateFit> norm_sum_fit;
  std::optional<RateFit> gamma_fit;
  std::optional<RateFit> h1_fit;
  std::vector<std::string> notes;
};

/// Runs the limit once and every lambda against it; per-lambda runs execute
/// concurrently when `parallel` is set. Lambdas whose run failed are left
/// out of the fits.
SweepResult run_sweep(const ExperimentConfig& config, bool parallel = true);

enum class MmsSystem { Npns, Limit };
enum class MmsKind { Temporal, Spatial };

struct MmsRow {
  int n = 0;
  double dt = 0.0;
  double error = 0.0;  ///< max-norm error at the final time
  double ratio = 0.0;  ///< previous error / this error (0 on the first row)
  double order = 0.0;  ///< log(ratio) / log(step ratio), 0 on the first row
};

struct MmsStudy {
  MmsSystem system = MmsSystem::Npns;
  MmsKind kind = MmsKind::Temporal;
  std::vector<MmsRow> rows;
};

/// Max-norm error of one manufactured run.
double mms_error(MmsSystem system, MmsKind kind, int dim, int n, double dt, double lambda,
                 double final_time, double mu = 1.0);

/// Temporal: grid mms.n, steps mms.dts. Spatial: grids mms.grid_sizes,
/// step mms.spatial_dt.
MmsStudy run_mms(const MmsConfig& mms, MmsSystem system, MmsKind kind, int dim = 2,
                 double mu = 1.0);

const char* to_string(MmsSystem system);
const char* to_string(MmsKind kind);

Table functional_table(const ComparisonResult& result);
Table step_table(const std::vector<StepRecord>& steps);
Table mms_table(const MmsStudy& study);
std::string sweep_summary_json(const SweepResult& sweep);

/// File name fragment for a lambda value, e.g. "0.025".
std::string lambda_tag(double lambda);

void emit_comparison(const std::filesystem::path& dir, const ComparisonResult& result);
void emit_sweep(const std::filesystem::path& dir, const SweepResult& sweep);

}  // namespace eldiff
