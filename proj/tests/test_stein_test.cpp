#include "finiten/stein_test.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "finiten/error.hpp"
#include "finiten/harness.hpp"
#include "finiten/specfun.hpp"

using finiten::Cutoff;
using finiten::FiniteNLaw;
using finiten::JacobiBasis;
using finiten::SteinTestConfig;

TEST(SteinTestConfig, DefaultsAndValidation) {
  EXPECT_EQ(SteinTestConfig::even_modes(10), (std::vector<int>{4, 6, 8, 10}));
  EXPECT_EQ(SteinTestConfig::even_modes(5), (std::vector<int>{4}));
  const auto config = SteinTestConfig::defaults(5.0);
  EXPECT_EQ(config.m, 4);
  EXPECT_EQ(config.modes, std::vector<int>{4});
  EXPECT_EQ(config.level, 0.05);
  EXPECT_EQ(config.cutoff.source, Cutoff::Source::kTheoretical);
  EXPECT_NO_THROW(config.validate());

  auto bad = config;
  bad.modes = {};
  EXPECT_THROW(bad.validate(), finiten::ConfigError);
  bad.modes = {6};
  EXPECT_THROW(bad.validate(), finiten::ConfigError);
  bad.modes = {4, 4};
  EXPECT_THROW(bad.validate(), finiten::ConfigError);
  bad = config;
  bad.m = 3;
  bad.modes = {2};
  EXPECT_THROW(bad.validate(), finiten::ConfigError);
  bad = config;
  bad.level = 1.0;
  EXPECT_THROW(bad.validate(), finiten::ConfigError);
  bad = config;
  bad.cutoff = Cutoff::calibrated(-1.0);
  EXPECT_THROW(bad.validate(), finiten::ConfigError);
}

TEST(Standardize, HandExampleAndErrors) {
  const std::vector<double> two{-1.0, 1.0};
  EXPECT_EQ(finiten::standardize(two), two);
  EXPECT_THROW(finiten::standardize(std::vector<double>{1.0}), finiten::DomainError);
  EXPECT_THROW(finiten::standardize(std::vector<double>{2.0, 2.0, 2.0}),
               finiten::DegenerateSampleError);
}

TEST(Standardize, MomentsIdempotenceAndAffineInvariance) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xs(37 + trial);
    for (double& x : xs) x = normal(gen);
    const auto z = finiten::standardize(xs);
    const double n = static_cast<double>(z.size());
    EXPECT_NEAR(std::accumulate(z.begin(), z.end(), 0.0) / n, 0.0, 1e-15);
    EXPECT_NEAR(std::inner_product(z.begin(), z.end(), z.begin(), 0.0) / n, 1.0, 1e-14);

    const auto twice = finiten::standardize(z);
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(twice[i], z[i], 1e-12);

    const double a = 3.7 - trial, b = 0.02 + trial * 1.5;
    std::vector<double> moved(xs.size());
    std::transform(xs.begin(), xs.end(), moved.begin(), [&](double x) { return a + b * x; });
    const auto z_moved = finiten::standardize(moved);
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(z_moved[i], z[i], 1e-12);
  }
}

TEST(Coefficients, ParityAndSinglePoint) {
  auto config = SteinTestConfig::defaults(5.0, 10);
  config.modes = {1, 3, 4, 5, 7};
  const JacobiBasis basis(1.0, 10);
  const std::vector<double> symmetric{-0.3, 0.3, -1.1, 1.1, -2.0, 2.0};
  const auto mu = finiten::coefficients(symmetric, config, basis);
  EXPECT_EQ(mu.at(1), 0.0);
  EXPECT_EQ(mu.at(3), 0.0);
  EXPECT_EQ(mu.at(5), 0.0);
  EXPECT_EQ(mu.at(7), 0.0);
  EXPECT_NE(mu.at(4), 0.0);

  auto one = SteinTestConfig::defaults(5.0);
  const std::vector<double> point{0.8};
  EXPECT_DOUBLE_EQ(finiten::coefficients(point, one, basis).at(4), basis.psi(4, 0.8 / std::sqrt(5.0)));
}

TEST(Coefficients, BasisMismatch) {
  const auto config = SteinTestConfig::defaults(5.0, 6);
  const std::vector<double> xs{-1.0, 0.0, 1.0};
  EXPECT_THROW(finiten::coefficients(xs, config, JacobiBasis(2.0, 6)), finiten::ConfigError);
  EXPECT_THROW(finiten::coefficients(xs, config, JacobiBasis(1.0, 4)), finiten::ConfigError);
}

TEST(Coefficients, NullRangeAtLargeN) {
  auto config = SteinTestConfig::defaults(5.0, 10);
  const FiniteNLaw law(5.0);
  const JacobiBasis basis = JacobiBasis::for_law(law, 10);
  int inside = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto z = finiten::standardize(finiten::sample(law, 100000, 1000 + rep));
    const auto mu = finiten::mode_coefficients(z, config, basis);
    inside += std::all_of(mu.begin(), mu.end(), [](double v) { return std::abs(v) <= 4.0; });
  }
  EXPECT_GE(inside, 99);
}

TEST(Statistic, SumOfSquaresAndPermutationInvariance) {
  const FiniteNLaw law(7.0);
  const auto config = SteinTestConfig::defaults(7.0, 8);
  const JacobiBasis basis = JacobiBasis::for_law(law, 8);
  auto z = finiten::standardize(finiten::sample(law, 300, 5));
  const auto mu = finiten::mode_coefficients(z, config, basis);
  double sum = 0.0;
  for (double v : mu) sum += v * v;
  const double t = finiten::statistic(z, config, basis);
  EXPECT_NEAR(t, sum, 1e-12);
  EXPECT_GE(t, 0.0);
  std::mt19937 gen(1);
  std::shuffle(z.begin(), z.end(), gen);
  EXPECT_NEAR(finiten::statistic(z, config, basis), t, 1e-12);
}

TEST(Statistic, NullMeanAndChiSquaredLaw) {
  auto config = SteinTestConfig::defaults(5.0, 4);
  config.standardize = false;
  auto stats = finiten::harness::simulate_statistics(config, 500, finiten::harness::Hypothesis::kNull,
                                                     finiten::harness::Purpose::kEvalNull, 20000, 17);
  const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) / stats.size();
  EXPECT_NEAR(mean, 1.0, 0.05);

  std::sort(stats.begin(), stats.end());
  double ks = 0.0;
  const double n = static_cast<double>(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const double u = finiten::specfun::chi2_cdf(1, stats[i]);
    ks = std::max({ks, (i + 1) / n - u, u - i / n});
  }
  EXPECT_LE(ks, 0.02);

  auto two = SteinTestConfig::defaults(5.0, 6);
  two.standardize = false;
  auto stats2 = finiten::harness::simulate_statistics(two, 500, finiten::harness::Hypothesis::kNull,
                                                      finiten::harness::Purpose::kEvalNull, 20000, 18);
  std::sort(stats2.begin(), stats2.end());
  EXPECT_NEAR(stats2[static_cast<std::size_t>(0.95 * stats2.size())], 5.99, 0.15);
}

// Estimating the scale perturbs the even modes; the effect is large for small
// N and fades as the law approaches the Gaussian.
TEST(Statistic, StandardizedNullInflation) {
  using finiten::harness::Hypothesis;
  using finiten::harness::Purpose;
  auto mean_of = [](double N) {
    const auto stats = finiten::harness::simulate_statistics(
        SteinTestConfig::defaults(N, 4), 500, Hypothesis::kNull, Purpose::kEvalNull, 20000, 19);
    return std::accumulate(stats.begin(), stats.end(), 0.0) / stats.size();
  };
  EXPECT_GT(mean_of(5.0), 1.5);
  EXPECT_NEAR(mean_of(20.0), 1.03, 0.05);
}

TEST(RunTest, KnownScaleSkipsStandardization) {
  const FiniteNLaw law(5.0);
  auto config = SteinTestConfig::defaults(5.0, 6);
  config.standardize = false;
  const JacobiBasis basis = JacobiBasis::for_law(law, 6);
  const auto xs = finiten::sample(law, 200, 21);
  const auto report = finiten::run_test(xs, config, basis);
  EXPECT_NEAR(report.statistic, finiten::statistic(xs, config, basis), 1e-12);
  std::vector<double> shifted(xs);
  for (double& x : shifted) x += 0.5;
  EXPECT_NE(finiten::run_test(shifted, config, basis).statistic, report.statistic);
  config.standardize = true;
  EXPECT_NEAR(finiten::run_test(xs, config, basis).statistic,
              finiten::statistic(finiten::standardize(xs), config, basis), 1e-12);
  EXPECT_THROW(finiten::run_test(std::vector<double>{}, config, basis), finiten::DomainError);
}

TEST(RunTest, ReportConsistency) {
  const FiniteNLaw law(5.0);
  const auto config = SteinTestConfig::defaults(5.0, 8);
  const JacobiBasis basis = JacobiBasis::for_law(law, 8);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto xs = finiten::sample(law, 60, seed);
    const auto report = finiten::run_test(xs, config, basis);
    double sum = 0.0;
    for (const auto& [k, mu] : report.coefficients) sum += mu * mu;
    EXPECT_NEAR(report.statistic, sum, 1e-12);
    EXPECT_EQ(report.dof, 3);
    EXPECT_NEAR(report.cutoff, finiten::specfun::chi2_quantile(3, 0.95), 1e-12);
    EXPECT_EQ(report.reject, report.statistic > report.cutoff);
    EXPECT_NEAR(report.p_value, finiten::specfun::chi2_sf(3, report.statistic), 1e-15);
    if (!report.reject) EXPECT_GT(report.p_value, config.level);
  }
}

TEST(RunTest, CalibratedCutoffIsUsedVerbatim) {
  auto config = SteinTestConfig::defaults(5.0);
  config.cutoff = Cutoff::calibrated(1e-9);
  const JacobiBasis basis(1.0, 4);
  const auto report = finiten::run_test(finiten::sample(FiniteNLaw(5.0), 50, 9), config, basis);
  EXPECT_EQ(report.cutoff, 1e-9);
  EXPECT_TRUE(report.reject);
}

TEST(RunTest, LocationScaleAndPermutationInvariance) {
  const FiniteNLaw law(10.0);
  const auto config = SteinTestConfig::defaults(10.0, 10);
  const finiten::SteinTest test(config);
  auto xs = finiten::sample_gaussian_alternative(200, 4);
  const auto base = test.run(xs);
  std::vector<double> moved(xs.size());
  std::transform(xs.begin(), xs.end(), moved.begin(), [](double x) { return -4.0 + 2.5 * x; });
  const auto shifted = test.run(moved);
  EXPECT_NEAR(shifted.statistic, base.statistic, 1e-10);
  EXPECT_EQ(shifted.reject, base.reject);
  std::reverse(xs.begin(), xs.end());
  EXPECT_NEAR(test.run(xs).statistic, base.statistic, 1e-10);
  EXPECT_NEAR(test.evaluate(xs), base.statistic, 1e-10);
}

TEST(RunTest, DegenerateInput) {
  const finiten::SteinTest test(SteinTestConfig::defaults(5.0));
  EXPECT_THROW(test.run(std::vector<double>{1.0, 1.0}), finiten::DegenerateSampleError);
  EXPECT_THROW(test.run(std::vector<double>{1.0}), finiten::DomainError);
}

TEST(ReportJson, FieldNames) {
  finiten::TestReport report;
  report.statistic = 1.5;
  report.coefficients = {{4, -1.0}, {6, 0.5}};
  report.dof = 2;
  report.cutoff = 5.99;
  report.p_value = 0.47;
  report.reject = false;
  EXPECT_EQ(finiten::to_json(report),
            R"({"statistic":1.5,"dof":2,"cutoff":5.99,"p_value":0.47,"reject":false,)"
            R"("coefficients":{"4":-1.0,"6":0.5}})");
}
