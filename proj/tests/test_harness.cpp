#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "eldiff/config.hpp"
#include "eldiff/errors.hpp"
#include "eldiff/harness.hpp"

using namespace eldiff;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  return parse_config(R"(
dim = 2
n = 32
lambdas = [0.2, 0.1, 0.05]
final_time = 0.1
snapshots = 5
z0_offset = 2.0
doping_modes = [[1, 0, cos, 0.1], [0, 1, cos, 0.1]]
v0_modes_x = [[0, 1, sin, 0.05]]
v0_modes_y = [[1, 0, sin, 0.05]]
)");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RateFit, ExactPowerLaws) {
  std::vector<double> l{0.2, 0.1, 0.05, 0.025};
  std::vector<double> lin, quad;
  for (double x : l) {
    lin.push_back(x);
    quad.push_back(3.0 * x * x);
  }
  auto a = fit_power_law(l, lin);
  EXPECT_NEAR(a.slope, 1.0, 1e-12);
  EXPECT_NEAR(a.intercept, 0.0, 1e-12);
  EXPECT_NEAR(a.r_squared, 1.0, 1e-12);
  auto b = fit_power_law(l, quad);
  EXPECT_NEAR(b.slope, 2.0, 1e-12);
  EXPECT_NEAR(b.intercept, std::log(3.0), 1e-12);
  EXPECT_EQ(b.values, quad);
}

TEST(RateFit, NoisyDataAndErrors) {
  auto f = fit_power_law({0.4, 0.2, 0.1, 0.05}, {1.0, 0.3, 0.4, 0.01});
  EXPECT_GE(f.r_squared, 0.0);
  EXPECT_LE(f.r_squared, 1.0);
  try {
    fit_power_law({0.1, 0.05}, {1.0, 2.0});
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
  EXPECT_THROW(fit_power_law({0.1, 0.05, 0.02}, {1.0, 0.0, 2.0}), SolverError);
}

TEST(Comparison, HomogeneousScenarioIsZero) {
  auto c = small_config();
  c.doping.terms.clear();
  c.v0.assign(2, ProfileSpec{});
  auto r = run_comparison(c, 0.1);
  ASSERT_EQ(r.rows.size(), 6u);
  for (const auto& row : r.rows) {
    const auto values = functional_values(row);
    for (std::size_t i = 1; i < values.size(); ++i) EXPECT_LE(std::abs(values[i]), 1e-10);
    EXPECT_LE(row.gamma, 1e-10);
    EXPECT_LE(row.norms.sum, 1e-10);
    EXPECT_LE(row.h1_error, 1e-10);
  }
  EXPECT_FALSE(r.failure.has_value());
}

TEST(Comparison, ScenarioPropertiesHold) {
  auto c = small_config();
  auto r = run_comparison(c, 0.1);
  ASSERT_EQ(r.rows.size(), 6u);
  EXPECT_FALSE(r.failure.has_value());
  for (const auto& row : r.rows) {
    EXPECT_TRUE(std::isfinite(row.norms.sum));
    EXPECT_GT(row.norms.sum, 0.0);
    EXPECT_GT(row.gamma, 0.0);
  }
  EXPECT_LE(r.max_identity_residual, 1e-8);
  EXPECT_TRUE(r.regularity.holds);
  EXPECT_GE(r.ratio_min, kNormRatioLower);
  EXPECT_LE(r.ratio_max, kNormRatioUpper);
  EXPECT_LE(r.max_curl_defect, 1e-10);
}

TEST(Comparison, SpatialResolutionCheck) {
  auto c = small_config();
  c.final_time = 0.2;
  c.n = 64;
  const double fine = run_comparison(c, 0.1).sup_h1_error();
  c.n = 32;
  const double coarse = run_comparison(c, 0.1).sup_h1_error();
  EXPECT_LT(std::abs(coarse - fine) / fine, 0.05);
}

TEST(Sweep, FitsMonotonicityAndOutputs) {
  auto c = small_config();
  auto sweep = run_sweep(c, true);
  ASSERT_EQ(sweep.comparisons.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(sweep.comparisons[i].lambda, c.lambdas[i]);
  for (std::size_t i = 1; i < 3; ++i) {
    EXPECT_LT(sweep.comparisons[i].sup_h1_error(), sweep.comparisons[i - 1].sup_h1_error());
    EXPECT_LT(sweep.comparisons[i].sup_norm_sum(), sweep.comparisons[i - 1].sup_norm_sum());
  }
  ASSERT_TRUE(sweep.norm_sum_fit && sweep.gamma_fit && sweep.h1_fit);
  EXPECT_GT(sweep.norm_sum_fit->slope, 0.9);
  EXPECT_GT(sweep.gamma_fit->slope, 1.8);

  auto dir = fs::temp_directory_path() / "eldiff_tests" / "sweep_a";
  fs::remove_all(dir);
  emit_sweep(dir, sweep);
  auto j = nlohmann::json::parse(slurp(dir / "sweep_summary.json"));
  EXPECT_EQ(j["runs"].size(), 3u);
  EXPECT_NEAR(j["fits"]["gamma"]["slope"].get<double>(), sweep.gamma_fit->slope, 1e-15);
  for (double l : c.lambdas) EXPECT_TRUE(fs::exists(dir / ("functionals_lambda_" + lambda_tag(l) + ".csv")));

  // serial and concurrent execution write identical bytes
  auto serial = run_sweep(c, false);
  auto dir_b = fs::temp_directory_path() / "eldiff_tests" / "sweep_b";
  fs::remove_all(dir_b);
  emit_sweep(dir_b, serial);
  for (double l : c.lambdas) {
    const auto name = "functionals_lambda_" + lambda_tag(l) + ".csv";
    EXPECT_EQ(slurp(dir / name), slurp(dir_b / name));
  }
  EXPECT_EQ(slurp(dir / "sweep_summary.json"), slurp(dir_b / "sweep_summary.json"));
}

TEST(Sweep, TooFewLambdasSkipsFits) {
  auto c = small_config();
  c.lambdas = {0.2, 0.1};
  auto sweep = run_sweep(c, false);
  EXPECT_FALSE(sweep.norm_sum_fit.has_value());
  EXPECT_FALSE(sweep.notes.empty());
}

TEST(Mms, TableShape) {
  MmsStudy s;
  s.rows = {{32, 1e-3, 1e-6, 0.0, 0.0}, {32, 5e-4, 2.5e-7, 4.0, 2.0}};
  auto t = mms_table(s);
  EXPECT_EQ(t.columns.size(), 5u);
  EXPECT_EQ(t.rows.size(), 2u);
}
