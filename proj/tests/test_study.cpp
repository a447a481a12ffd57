#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "homog/errors.hpp"
#include "homog/study.hpp"
#include "support.hpp"

using namespace homog;
using namespace homog::testing;

namespace {

SolveConfig cg(const Eigen::VectorXd& p, double tol) {
  SolveConfig cfg;
  cfg.rel_tol = tol;
  cfg.max_iter = 5000;
  cfg.loading = p;
  return cfg;
}

VoxelField random_field(const Grid& g, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VoxelField f(g, m);
  for (double& v : f.data()) v = u(rng);
  return f;
}

}  // namespace

TEST(SignSplit, SignDefiniteMedia) {
  const Grid g(2, 4);
  const VoxelField tau = random_field(g, 2, 1);
  const PhaseTensor ref = scalar(2, 1.0);
  const auto stiff = build_coefficients(make_uniform(g, scalar(2, 2.0)), ref, 4);
  const SignSplit up = sign_split(tau, stiff, ref);
  EXPECT_EQ(max_abs_diff(up.plus, tau), 0.0);
  EXPECT_EQ(max_abs(up.minus), 0.0);
  EXPECT_EQ(max_abs_diff(up.test, tau), 0.0);

  const auto soft = build_coefficients(make_uniform(g, scalar(2, 0.5)), ref, 4);
  const SignSplit down = sign_split(tau, soft, ref);
  EXPECT_EQ(max_abs(down.plus), 0.0);
  EXPECT_EQ(max_abs_diff(down.minus, tau), 0.0);
  for (std::size_t i = 0; i < tau.size(); ++i) EXPECT_EQ(down.test.data()[i], -tau.data()[i]);
}

TEST(SignSplit, MixedEigenvaluesSplitOrthogonally) {
  const Grid g(2, 4);
  Eigen::Matrix2d a;
  a << 1.25, 0.75, 0.75, 1.25;  // eigenvalues 2 and 0.5
  const Microstructure micro(g, std::vector<std::uint8_t>(16, 0), {PhaseTensor::conduction(a)});
  const PhaseTensor ref = scalar(2, 1.0);
  const CoefficientField coeffs = build_coefficients(micro, ref, 4);
  const VoxelField tau = random_field(g, 2, 2);
  const SignSplit split = sign_split(tau, coeffs, ref);
  const Eigen::Vector2d up = Eigen::Vector2d(1, 1).normalized();
  for (std::size_t lin = 0; lin < g.size(); ++lin) {
    const Eigen::Vector2d t(tau.at(lin, 0), tau.at(lin, 1));
    const Eigen::Vector2d p(split.plus.at(lin, 0), split.plus.at(lin, 1));
    const Eigen::Vector2d m(split.minus.at(lin, 0), split.minus.at(lin, 1));
    EXPECT_NEAR(p.dot(m), 0.0, 1e-12);
    EXPECT_NEAR((p + m - t).norm(), 0.0, 1e-15);
    EXPECT_NEAR((p - up * up.dot(t)).norm(), 0.0, 1e-14);
  }
}

TEST(SignSplit, NonCommutingCoefficientIsRejected) {
  const Grid g(2, 2);
  Eigen::Matrix2d a, a0;
  a << 3.0, 1.0, 1.0, 3.0;
  a0 << 1.0, 0.0, 0.0, 0.5;
  const Microstructure micro(g, std::vector<std::uint8_t>(4, 0), {PhaseTensor::conduction(a)});
  const PhaseTensor ref = PhaseTensor::conduction(a0);
  const CoefficientField coeffs = build_coefficients(micro, ref, 2);
  EXPECT_THROW(sign_split(random_field(g, 2, 3), coeffs, ref), ContractViolation);
}

TEST(InfSup, CoerciveUniformMedium) {
  const Grid g(2, 4);
  const SystemOperator op = make_operator(make_uniform(g, scalar(2, 2.0)), scalar(2, 1.0), 4,
                                          GreenKind::Filtered);
  const InfSupRow row = infsup_row(op);
  EXPECT_GT(row.sigma_min, 0.0);
  EXPECT_GE(row.constructive_bound, row.sigma_min - 1e-12);
  EXPECT_GE(row.sigma_max, row.sigma_min);
  EXPECT_NEAR(row.floor, 1.0, 1e-15);
}

TEST(InfSup, MixedSignMediumIsStableUnderRefinement) {
  // Quadrants align with every grid, so each voxel is a single phase.
  const Microstructure cb = make_checkerboard(Grid(2, 16), scalar(2, 0.5), scalar(2, 2.0));
  const auto rows = infsup_check(cb, scalar(2, 1.0), GreenKind::Filtered, {4, 8, 16});
  ASSERT_EQ(rows.size(), 3u);
  double lo = 1e300, hi = 0.0, clo = 1e300, chi = 0.0;
  for (const auto& row : rows) {
    EXPECT_GT(row.constructive_bound, 0.0);
    EXPECT_GE(row.constructive_bound, row.floor - 1e-12);
    EXPECT_NEAR(row.floor, 1.0, 1e-12);  // min(1 / (2 - 1), 2 - 1 / 1)
    lo = std::min(lo, row.sigma_min);
    hi = std::max(hi, row.sigma_min);
    clo = std::min(clo, row.constructive_bound);
    chi = std::max(chi, row.constructive_bound);
  }
  EXPECT_LT(hi / lo, 2.0);
  EXPECT_LT(chi / clo, 2.0);
}

TEST(InfSup, DenseLimitIsEnforced) {
  const Microstructure cb = make_checkerboard(Grid(2, 16), scalar(2, 0.5), scalar(2, 2.0));
  InfSupOptions opts;
  opts.dense_limit = 100;
  EXPECT_THROW(infsup_check(cb, scalar(2, 1.0), GreenKind::Filtered, {8}, opts), SizeLimitError);
}

TEST(FitRate, RecoversSyntheticExponent) {
  const std::vector<double> h{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  std::vector<double> e;
  for (double x : h) e.push_back(3.0 * std::pow(x, 1.5));
  const RateFit fit = fit_rate(h, e);
  EXPECT_NEAR(fit.exponent, 1.5, 1e-12);
  EXPECT_NEAR(std::exp(fit.intercept), 3.0, 1e-12);
  EXPECT_NEAR(fit.residual, 0.0, 1e-12);
  EXPECT_THROW(fit_rate({0.5, 0.25}, {1.0, 0.5}), std::invalid_argument);
  EXPECT_THROW(fit_rate({0.5, 0.25, 0.125}, {1.0, 0.0, 0.5}), std::invalid_argument);
}

TEST(ConvergenceSweep, LaminateIsExactOnEveryGrid) {
  const Microstructure lam = make_laminate(Grid(1, 32), scalar(1, 1.0), scalar(1, 4.0));
  SweepOptions opts;
  opts.kind = GreenKind::Consistent;
  opts.solve = cg(Eigen::VectorXd::Ones(1), 1e-12);
  opts.oracle = 1.6;
  const SweepResult r = convergence_sweep(lam, scalar(1, 0.5), {4, 8, 16, 32}, opts);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) EXPECT_LE(row.error, 1e-10);
}

TEST(ConvergenceSweep, CheckerboardApproachesGeometricMean) {
  const Microstructure cb = make_checkerboard(Grid(2, 128), scalar(2, 1.0), scalar(2, 4.0));
  SweepOptions opts;
  opts.solve = cg(Eigen::Vector2d(1, 0), 1e-8);
  opts.oracle = 2.0;
  const SweepResult r = convergence_sweep(cb, scalar(2, 0.5), {16, 32, 64, 128}, opts);
  ASSERT_FALSE(r.aborted);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    EXPECT_GT(r.rows[i].value, r.rows[i - 1].value);
    EXPECT_LT(r.rows[i].error, r.rows[i - 1].error);
  }
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_GE(r.fit->exponent, 0.4);
  const std::string csv = sweep_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,h,value,error,iterations,wall_time_s,residual,converged");
}

TEST(ConvergenceSweep, SelfConvergenceDropsReferencePoint) {
  const Microstructure cb = make_checkerboard(Grid(2, 64), scalar(2, 1.0), scalar(2, 4.0));
  SweepOptions opts;
  opts.solve = cg(Eigen::Vector2d(1, 0), 1e-8);
  const SweepResult r = convergence_sweep(cb, scalar(2, 0.5), {8, 16, 32, 64}, opts);
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_EQ(r.fit->h.size(), 3u);
  EXPECT_EQ(r.reference, r.rows.back().value);
  EXPECT_EQ(r.rows.back().error, 0.0);
  // Successive differences shrink.
  for (std::size_t i = 2; i < r.rows.size(); ++i) {
    EXPECT_LT(std::abs(r.rows[i].value - r.rows[i - 1].value),
              std::abs(r.rows[i - 1].value - r.rows[i - 2].value));
  }
}

TEST(ConvergenceSweep, RejectsDegenerateInputs) {
  const Microstructure cb = make_checkerboard(Grid(2, 32), scalar(2, 1.0), scalar(2, 4.0));
  SweepOptions opts;
  opts.solve = cg(Eigen::Vector2d(1, 0), 1e-6);
  try {
    convergence_sweep(cb, scalar(2, 0.5), {16}, opts);
    FAIL() << "expected a degenerate fit error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate"), std::string::npos);
  }
  EXPECT_THROW(convergence_sweep(cb, scalar(2, 0.5), {4, 16, 8, 32}, opts), std::invalid_argument);
  EXPECT_THROW(convergence_sweep(cb, scalar(2, 0.5), {4, 8, 12, 32}, opts), std::invalid_argument);
}

TEST(ConvergenceSweep, UnconvergedSolveAbortsWithPartialTable) {
  const Microstructure cb = make_checkerboard(Grid(2, 32), scalar(2, 1.0), scalar(2, 4.0));
  SweepOptions opts;
  opts.solve = cg(Eigen::Vector2d(1, 0), 1e-12);
  opts.solve.max_iter = 2;
  const SweepResult r = convergence_sweep(cb, scalar(2, 0.5), {4, 8, 16, 32}, opts);
  EXPECT_TRUE(r.aborted);
  EXPECT_FALSE(r.fit.has_value());
  EXPECT_FALSE(r.rows.back().report.converged);
}

TEST(BenchTable, PerfectScalingGivesUnitEfficiency) {
  std::vector<BenchTiming> timings;
  for (int p : {1, 2, 4}) timings.push_back({32, 3, p, 10, 8.0 / p});
  const auto rows = bench_table(timings);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].efficiency.has_value());
  EXPECT_DOUBLE_EQ(*rows[1].efficiency, 1.0);
  EXPECT_DOUBLE_EQ(*rows[2].efficiency, 1.0);
  EXPECT_DOUBLE_EQ(*rows[0].ratio, 8.0 / (10 * std::pow(32.0, 3) * std::log(32.0)));
  const std::string csv = bench_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,P,iterations,T_P,E,ratio");
  EXPECT_NE(csv.find("\n32,1,10,8,,"), std::string::npos);
}

TEST(BenchTable, EfficiencyNeedsMatchingBaseline) {
  const auto rows = bench_table({{32, 3, 1, 10, 4.0}, {64, 3, 2, 10, 4.0}});
  EXPECT_FALSE(rows[1].efficiency.has_value());
}

TEST(Bench, MeasuresEveryThreadCountAndRestoresSetting) {
  const Microstructure cb = make_checkerboard(Grid(2, 32), scalar(2, 1.0), scalar(2, 4.0));
  BenchOptions opts;
  opts.sides = {16, 32};
  opts.threads = {1, 2};
  opts.solve = cg(Eigen::Vector2d(1, 0), 1e-6);
  set_fft_threads(1);
  const auto rows = bench(cb, scalar(2, 0.5), opts);
  EXPECT_EQ(fft_threads(), 1);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_FALSE(rows[0].efficiency.has_value());
  EXPECT_TRUE(rows[1].efficiency.has_value());
  // Thread count does not change the iteration count.
  EXPECT_EQ(rows[0].timing.iterations, rows[1].timing.iterations);
  for (const auto& row : rows) EXPECT_TRUE(row.ratio.has_value());
}
