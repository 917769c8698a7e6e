#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "eldiff/errors.hpp"
#include "eldiff/mms.hpp"
#include "eldiff/quasineutral.hpp"
#include "dense_oracle.hpp"
#include "test_support.hpp"

using namespace eldiff;
using eldiff::test::from_function;
using eldiff::test::max_diff;
using eldiff::test::random_field;

namespace {

Params limit_params() {
  Params p;
  p.lambda = 0.0;
  return p;
}

}  // namespace

TEST(LimitPotential, HomogeneousRightHandSide) {
  auto g = make_grid(2, 16);
  auto z = ScalarField::constant(g, 2.0) + from_function(g, [](double x, double, double) { return 0.3 * std::cos(x); });
  auto sol = solve_limit_potential(z, ScalarField::zeros(g), VectorField::zeros(g));
  EXPECT_EQ(sol.report.iterations, 0);
  EXPECT_EQ(sol.potential.max_abs(), 0.0);
  EXPECT_EQ(sol.field.max_abs(), 0.0);
}

TEST(LimitPotential, ConstantCoefficientOneIteration) {
  auto g = make_grid(2, 16);
  std::mt19937_64 rng(2);
  auto d = random_field(g, rng, 5, 0.4);
  auto sol = solve_limit_potential(ScalarField::constant(g, 2.0), d, VectorField::zeros(g));
  EXPECT_EQ(sol.report.iterations, 1);
  auto want = 0.5 * (d - ScalarField::constant(g, d.mean()));
  EXPECT_LT(max_diff(sol.potential, want), 1e-13);
}

TEST(LimitPotential, MatchesDenseDirectSolve) {
  const int n = 16;
  auto g = make_grid(2, n);
  auto z = from_function(g, [](double x, double, double) { return 2.0 + 0.3 * std::cos(x); });
  auto d = from_function(g, [](double x, double, double) { return 0.1 * std::cos(x); });
  auto sol = solve_limit_potential(z, d, VectorField::zeros(g));
  EXPECT_LE(sol.report.iterations, 100);

  auto dense = eldiff::test::dense_limit_solve(n, {{{0, 0}, 2.0}, {{1, 0}, 0.15}, {{-1, 0}, 0.15}},
                           {{{1, 0}, 0.05}, {{-1, 0}, 0.05}});
  double num = 0.0, den = 0.0;
  for (const auto& [k, want] : dense) {
    const auto got = sol.potential.coeffs()[g->mode_index({k.first, k.second, 0})];
    num += std::norm(got - want);
    den += std::norm(want);
  }
  EXPECT_LE(std::sqrt(num / den), 1e-8);
}

TEST(LimitPotential, RelationResidual) {
  auto g = make_grid(2, 32);
  std::mt19937_64 rng(4);
  auto z = ScalarField::constant(g, 2.0) + 0.2 * random_field(g, rng, 5);
  auto d = 0.1 * random_field(g, rng, 5);
  auto v = leray_project(VectorField({0.1 * random_field(g, rng, 5), 0.1 * random_field(g, rng, 5)}));
  auto sol = solve_limit_potential(z, d, v);
  EXPECT_TRUE(sol.report.converged);
  EXPECT_LE(limit_relation_residual(z, d, v, sol.field), 1e-9);
}

TEST(LimitPotential, Errors) {
  auto g = make_grid(2, 16);
  auto d = from_function(g, [](double x, double, double) { return 0.1 * std::cos(x); });
  try {
    solve_limit_potential(ScalarField::constant(g, 0.1), d, VectorField::zeros(g));
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveZ);
  }
  auto z = from_function(g, [](double x, double y, double) { return 2.0 + 1.5 * std::cos(x) * std::cos(y); });
  EllipticOptions opts;
  opts.max_iterations = 1;
  try {
    solve_limit_potential(z, d, VectorField::zeros(g), opts);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotConverged);
  }
}

TEST(LimitRhs, SteadyAndConservative) {
  auto g = make_grid(2, 16);
  LimitState s{0.0, ScalarField::constant(g, 2.0), VectorField::zeros(g)};
  auto t = limit_rhs(s, ScalarField::zeros(g), limit_params());
  EXPECT_EQ(t.dz_dt.max_abs(), 0.0);
  EXPECT_EQ(t.dv_dt.max_abs(), 0.0);

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 3; ++trial) {
    LimitState r{0.0, ScalarField::constant(g, 2.0) + 0.2 * random_field(g, rng, 4),
                 leray_project(VectorField({0.1 * random_field(g, rng, 4), 0.1 * random_field(g, rng, 4)}))};
    auto tr = limit_rhs(r, 0.1 * random_field(g, rng, 4), limit_params());
    EXPECT_LT(std::abs(tr.dz_dt.mean()), 1e-14);
  }
}

TEST(LimitRhs, ManufacturedResidual) {
  auto g = make_grid(2, 32);
  const auto sol = mms::limit_temporal();
  const double t = 0.4;
  auto state = mms::limit_exact(g, sol, 2, t);
  auto d = mms::limit_doping(g, sol);
  auto f = mms::limit_forcing(g, sol, limit_params())(t);
  auto pot = solve_limit_potential(state.z, d, state.v, {}, &f.elliptic_source);
  auto phi = mms::sample(g, sol.phi, t);
  EXPECT_LE(max_diff(pot.potential, phi - ScalarField::constant(g, phi.mean())), 1e-8);

  auto rhs = limit_rhs_with_field(state, d, limit_params(), pot.field);
  auto z_t = mms::sample(g, [&](const mms::Vars& x) { return mms::Jet(sol.z(x).dt()); }, t);
  EXPECT_LE(max_diff(rhs.dz_dt + f.dz, z_t), 1e-8);
  std::vector<ScalarField> vt;
  for (int i = 0; i < 2; ++i) {
    vt.push_back(mms::sample(g, [&, i](const mms::Vars& x) { return mms::Jet(sol.v[i](x).dt()); }, t));
  }
  EXPECT_LE(max_diff(rhs.dv_dt + leray_project(f.dv), VectorField(vt)), 1e-8);
}

TEST(LimitStepping, SteadyStateAndMeanConservation) {
  auto g = make_grid(2, 16);
  LimitState s{0.0, ScalarField::constant(g, 2.0), VectorField::zeros(g)};
  auto zero = ScalarField::zeros(g);
  auto prev = s;
  auto curr = step_imex_euler_limit(s, 1e-3, zero, limit_params());
  for (int i = 1; i < 100; ++i) {
    auto next = step_sbdf_limit(prev, curr, 1e-3, zero, limit_params());
    prev = std::move(curr);
    curr = std::move(next);
  }
  EXPECT_LT(max_diff(curr.z, s.z), 1e-10);
  EXPECT_LT(curr.v.max_abs(), 1e-10);

  std::mt19937_64 rng(9);
  LimitState r{0.0, ScalarField::constant(g, 2.0) + 0.2 * random_field(g, rng, 4),
               leray_project(VectorField({0.1 * random_field(g, rng, 4), 0.1 * random_field(g, rng, 4)}))};
  RunOptions opts;
  opts.final_time = 1.0;
  opts.snapshot_times = {0.0, 1.0};
  opts.control.dt = 1e-3;
  opts.control.fixed_dt = true;
  auto traj = run_limit(r, 0.1 * random_field(g, rng, 4), limit_params(), opts);
  EXPECT_EQ(traj.steps.size(), 1001u);
  const double m0 = traj.steps.front().mean_z;
  for (const auto& st : traj.steps) EXPECT_LE(std::abs(st.mean_z - m0), 1e-12 * m0);
}

TEST(LimitStepping, SecondOrderUnderManufacturedForcing) {
  auto g = make_grid(2, 32);
  const auto sol = mms::limit_temporal();
  auto d = mms::limit_doping(g, sol);
  auto forcing = mms::limit_forcing(g, sol, limit_params());
  auto error = [&](double dt) {
    RunOptions opts;
    opts.final_time = 0.2;
    opts.snapshot_times = {0.0, 0.2};
    opts.control.dt = dt;
    opts.control.fixed_dt = true;
    auto traj = run_limit(mms::limit_exact(g, sol, 2, 0.0), d, limit_params(), opts, forcing);
    auto want = mms::limit_exact(g, sol, 2, 0.2);
    const auto& got = traj.snapshots.back().state;
    return std::max(max_diff(got.z, want.z), max_diff(got.v, want.v));
  };
  EXPECT_NEAR(error(2e-3) / error(1e-3), 4.0, 0.8);
}

TEST(LimitRun, SnapshotsAndStencils) {
  auto g = make_grid(2, 16);
  auto d = from_function(g, [](double x, double y, double) { return 0.1 * (std::cos(x) + std::cos(y)); });
  LimitState s{0.0, ScalarField::constant(g, 2.0), VectorField::zeros(g)};
  RunOptions opts;
  opts.final_time = 0.0;
  opts.snapshot_times = {0.0};
  auto only = run_limit(s, d, limit_params(), opts);
  ASSERT_EQ(only.snapshots.size(), 1u);

  opts.final_time = 0.1;
  opts.snapshot_times = uniform_snapshot_times(0.1, 5);
  opts.control.dt = 5e-3;
  auto traj = run_limit(s, d, limit_params(), opts);
  ASSERT_EQ(traj.snapshots.size(), 6u);
  EXPECT_EQ(traj.snapshots.front().stencil, StencilKind::Forward);
  EXPECT_EQ(traj.snapshots.back().stencil, StencilKind::Backward);
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto& sn = traj.snapshots[k];
    EXPECT_EQ(sn.t, opts.snapshot_times[k]);
    EXPECT_EQ(sn.field_stencil.size(), sn.stencil == StencilKind::Centered ? 2u : 3u);
    // n - p - D = 0 by construction
    EXPECT_LT((sn.n - sn.p - d).max_abs(), 1e-15);
  }
}
