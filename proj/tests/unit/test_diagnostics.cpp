#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "steinflow/diagnostics.hpp"
#include "steinflow/errors.hpp"
#include "steinflow/sampler.hpp"
#include "support/oracles.hpp"

namespace steinflow {
namespace {

using testing::Gen;

Matrix point(std::initializer_list<double> v) {
  Matrix out(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(0, i++) = x;
  return out;
}

TEST(KsdVstat, SingleParticleAtMode) {
  EXPECT_NEAR(ksd_vstat(point({0}), KernelSpec::gaussian(1.0), ScoreModel::standard_gaussian(1)), 2.0, 1e-15);
  EXPECT_NEAR(ksd_vstat(point({0, 0}), KernelSpec::gaussian(1.0), ScoreModel::standard_gaussian(2)), 4.0, 1e-15);
  Vector m(1);
  m << 1.5;
  const ScoreModel shifted = GaussianTarget(m, Matrix::Identity(1, 1));
  EXPECT_NEAR(ksd_vstat(point({1.5}), KernelSpec::gaussian(0.8), shifted), 2.0 / 0.8, 1e-15);
}

TEST(KsdVstat, MatchesGenericSteinKernel) {
  Gen gen(51);
  for (int t = 0; t < 60; ++t) {
    const Eigen::Index d = gen.integer(1, 3);
    const Matrix x = gen.normal_matrix(gen.integer(1, 15), d, 1.5);
    const ScoreModel target = gen.target(d);
    const KernelSpec k = t % 2 ? KernelSpec::linear() : KernelSpec::gaussian(gen.log_uniform(0.3, 5));
    const double ksd = ksd_vstat(x, k, target);
    EXPECT_NEAR(ksd, testing::brute_force_ksd(x, k, target), 1e-10 * std::max(1.0, std::abs(ksd)));
    EXPECT_GE(ksd, -1e-10);
  }
}

TEST(RegKsd, NuOneEqualsKsd) {
  Gen gen(52);
  for (int t = 0; t < 30; ++t) {
    const Matrix x = gen.normal_matrix(gen.integer(1, 30), 2);
    const ScoreModel target = gen.target(2);
    const KernelSpec k = KernelSpec::gaussian(gen.log_uniform(0.3, 5));
    EXPECT_EQ(reg_ksd(x, k, target, 1.0), ksd_vstat(x, k, target));
  }
}

TEST(RegKsd, SingleParticleAtMode) {
  EXPECT_NEAR(reg_ksd(point({0}), KernelSpec::gaussian(1.0), ScoreModel::standard_gaussian(1), 0.5), 4.0, 1e-14);
}

TEST(RegKsd, ContinuousAtNuOne) {
  Gen gen(53);
  for (int t = 0; t < 20; ++t) {
    const Matrix x = gen.normal_matrix(gen.integer(2, 30), 1, 2.0);
    const ScoreModel target = gen.target(1);
    const KernelSpec k = KernelSpec::gaussian(median_heuristic(x));
    const double ksd = ksd_vstat(x, k, target);
    EXPECT_NEAR(reg_ksd(x, k, target, 0.999), ksd, 0.01 * ksd);
  }
}

TEST(RegKsd, MatchesAugmentedGramOperator) {
  Gen gen(54);
  for (int t = 0; t < 60; ++t) {
    const Eigen::Index n = gen.integer(1, 5);
    const Eigen::Index d = gen.integer(1, 2);
    const Matrix x = gen.normal_matrix(n, d, 1.5);
    const ScoreModel target = gen.target(d);
    const KernelSpec k = t % 4 == 3 ? KernelSpec::linear() : KernelSpec::gaussian(gen.log_uniform(0.5, 4));
    for (double nu : {0.1, 0.5, 0.9}) {
      const double expect = testing::augmented_gram_reg_ksd(x, k, target, nu);
      EXPECT_LE(testing::rel_err(reg_ksd(x, k, target, nu), expect), 1e-6) << "trial " << t << " nu " << nu;
    }
  }
}

TEST(RegKsd, CgPathAgrees) {
  Gen gen(55);
  const Matrix x = gen.normal_matrix(40, 1, 2.0);
  const ScoreModel target = ScoreModel::bimodal_mixture();
  const KernelSpec k = KernelSpec::gaussian(median_heuristic(x));
  EXPECT_LE(testing::rel_err(reg_ksd(x, k, target, 0.2, SolveConfig::cg(1e-13, 1000)),
                             reg_ksd(x, k, target, 0.2)),
            1e-8);
}

TEST(Spectral, FisherExamples) {
  EXPECT_EQ(spectral_fisher(SpectralModel({1, 0.5}, {0, 0})), 0.0);
  EXPECT_EQ(spectral_fisher(SpectralModel({1}, {3})), 9.0);
  EXPECT_EQ(spectral_fisher(SpectralModel({3, 2, 1}, {1, 2, 2})), 9.0);
}

TEST(Spectral, SteinExamples) {
  EXPECT_EQ(spectral_stein(SpectralModel({1}, {3})), 9.0);
  EXPECT_EQ(spectral_stein(SpectralModel({0.5, 0.25}, {2, 2})), 3.0);
  EXPECT_EQ(spectral_stein(SpectralModel({0.5, 0.25}, {0, 0})), 0.0);
}

TEST(Spectral, RegularizedSteinExamples) {
  for (double nu : {0.1, 0.5, 1.0}) EXPECT_NEAR(spectral_reg_stein(SpectralModel({1}, {3}), nu), 9.0, 1e-14);
  EXPECT_NEAR(spectral_reg_stein(SpectralModel({1, 0.5}, {1, 1}), 0.5), 5.0 / 3.0, 1e-15);
  const SpectralModel m({2, 0.7, 0.1}, {1, -2, 0.5});
  EXPECT_EQ(spectral_reg_stein(m, 1.0), spectral_stein(m));
}

TEST(Spectral, ModelValidation) {
  EXPECT_THROW(SpectralModel({1, 2}, {1, 1}), InvalidArgument);
  EXPECT_THROW(SpectralModel({1, 0}, {1, 1}), InvalidArgument);
  EXPECT_THROW(SpectralModel({1}, {1, 1}), DimensionMismatch);
}

SpectralModel random_model(Gen& gen) {
  const int n = gen.integer(1, 20);
  std::vector<double> lambda, c;
  for (int i = 0; i < n; ++i) {
    lambda.push_back(gen.log_uniform(1e-4, 10));
    c.push_back(gen.normal());
  }
  std::sort(lambda.rbegin(), lambda.rend());
  return SpectralModel(lambda, c);
}

TEST(Spectral, UpperBoundHoldsForEveryNu) {
  Gen gen(56);
  for (int t = 0; t < 500; ++t) {
    const SpectralModel m = random_model(gen);
    const double nu = gen.uniform(1e-6, 1.0 - 1e-6);
    EXPECT_LE(spectral_reg_stein(m, nu), spectral_fisher(m) / (1.0 - nu) * (1 + 1e-12));
  }
}

TEST(Spectral, TendsToFisherAsNuVanishes) {
  Gen gen(57);
  for (int t = 0; t < 100; ++t) {
    const int n = gen.integer(1, 10);
    std::vector<double> lambda, c;
    for (int i = 0; i < n; ++i) {
      lambda.push_back(gen.log_uniform(1e-3, 10));
      c.push_back(gen.normal());
    }
    std::sort(lambda.rbegin(), lambda.rend());
    const SpectralModel m(lambda, c);
    EXPECT_LE(testing::rel_err(spectral_reg_stein(m, 1e-8), spectral_fisher(m)), 1e-4);
  }
}

TEST(Sandwich, SingleModeHolds) {
  const SandwichResult r = sandwich_check(SpectralModel({1}, {1}), 0.5, 0.1);
  EXPECT_EQ(r.verdict, SandwichVerdict::kHolds);
  EXPECT_NEAR(r.source_norm2, 1.0, 1e-15);
  EXPECT_NEAR(r.nu_ratio_bound, 0.5, 1e-15);
}

TEST(Sandwich, ConditionViolated) {
  // Bound is 0.5, so nu / (1 - nu) = 1 is outside it.
  EXPECT_EQ(sandwich_check(SpectralModel({1}, {1}), 0.5, 0.5).verdict, SandwichVerdict::kConditionViolated);
}

TEST(Sandwich, ArgumentValidation) {
  EXPECT_THROW(sandwich_check(SpectralModel({1}, {1}), 0.0, 0.1), InvalidArgument);
  EXPECT_THROW(sandwich_check(SpectralModel({1}, {1}), 0.6, 0.1), InvalidArgument);
  EXPECT_THROW(sandwich_check(SpectralModel({1}, {1}), 0.5, 1.0), InvalidArgument);
}

TEST(Sandwich, HoldsWheneverConditionIsMet) {
  Gen gen(58);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    const SpectralModel m = random_model(gen);
    const double gamma = std::vector<double>{0.1, 0.25, 0.5}[static_cast<std::size_t>(t % 3)];
    const SandwichResult probe = sandwich_check(m, gamma, 0.5);
    const double ratio = probe.nu_ratio_bound * gen.uniform(0.0, 1.0);
    const double nu = ratio / (1.0 + ratio);
    if (!(nu > 0.0 && nu < 1.0)) continue;
    const SandwichResult r = sandwich_check(m, gamma, nu);
    EXPECT_EQ(r.verdict, SandwichVerdict::kHolds);
    ++checked;
  }
  EXPECT_GT(checked, 250);
}

TEST(GaussianClosedForms, KlExamples) {
  Matrix s(1, 1), q(1, 1);
  s << 4;
  q << 1;
  EXPECT_NEAR(gaussian_kl(s, q), 0.5 * (4 - 1 + std::log(0.25)), 1e-15);
  EXPECT_EQ(gaussian_kl(q, q), 0.0);
  Matrix s2 = Matrix::Zero(2, 2), q2 = Matrix::Zero(2, 2);
  s2.diagonal() << 4, 0.5;
  q2.diagonal() << 1, 2;
  Matrix a(1, 1), b(1, 1);
  a << 0.5;
  b << 2;
  EXPECT_NEAR(gaussian_kl(s2, q2), gaussian_kl(s, q) + gaussian_kl(a, b), 1e-14);
}

TEST(GaussianClosedForms, KlNonNegativeZeroOnlyAtTarget) {
  Gen gen(59);
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = gen.integer(1, 4);
    const Matrix s = gen.spd(d, 0.2, 5), q = gen.spd(d, 0.2, 5);
    EXPECT_GT(gaussian_kl(s, q), 0.0);
    EXPECT_NEAR(gaussian_kl(q, q), 0.0, 1e-12);
  }
}

TEST(GaussianClosedForms, FisherExamples) {
  Matrix s(1, 1), q(1, 1);
  s << 4;
  q << 1;
  EXPECT_NEAR(gaussian_fisher(s, q), 2.25, 1e-15);
  EXPECT_NEAR(gaussian_fisher(q, s), 0.5625, 1e-15);
  EXPECT_EQ(gaussian_fisher(q, q), 0.0);
  Matrix bad(1, 1);
  bad << -1;
  EXPECT_THROW(gaussian_kl(bad, q), NotSpd);
  EXPECT_THROW(gaussian_fisher(s, bad), NotSpd);
}

TEST(MseReport, Examples) {
  const ScoreModel m = ScoreModel::bimodal_mixture();
  const CosineParams p{0.0, 0.0};
  const Matrix at_mean = point({2.0 / 3.0});
  const Matrix at_zero = point({0.0});
  const auto a = mse_report(std::span<const Matrix>(&at_mean, 1), m, std::span<const CosineParams>(&p, 1));
  EXPECT_NEAR(a.at(TestFunction::kIdentity), 0.0, 1e-30);
  const auto b = mse_report(std::span<const Matrix>(&at_zero, 1), m, std::span<const CosineParams>(&p, 1));
  EXPECT_NEAR(b.at(TestFunction::kSquare), 25.0, 1e-13);
}

TEST(MseReport, AveragesOverReplicates) {
  const ScoreModel m = ScoreModel::standard_gaussian(1);
  const std::vector<Matrix> ens{point({1.0}), point({3.0})};
  const std::vector<CosineParams> p(2);
  const auto r = mse_report(ens, m, p);
  EXPECT_NEAR(r.at(TestFunction::kIdentity), (1.0 + 9.0) / 2.0, 1e-15);
}

TEST(Diagnose, ReportIsFiniteAndNonNegative) {
  Gen gen(60);
  const Matrix x = gen.normal_matrix(50, 1, 2.0);
  const DiagReport r = diagnose(x, KernelSpec::gaussian(median_heuristic(x)), ScoreModel::bimodal_mixture(), 0.1,
                                SolveConfig::cholesky(), CosineParams{0.3, 1.0});
  EXPECT_GE(r.ksd2, 0.0);
  EXPECT_GE(r.reg_ksd2, 0.0);
  for (const auto& [fn, v] : r.mse) EXPECT_TRUE(std::isfinite(v) && v >= 0.0);
}

TEST(ClampRoundoff, OnlySmallNegativesAreZeroed) {
  EXPECT_EQ(clamp_roundoff(-1e-9, 1.0), 0.0);
  EXPECT_EQ(clamp_roundoff(-1e-3, 1.0), -1e-3);
  EXPECT_EQ(clamp_roundoff(0.5, 1.0), 0.5);
}

}  // namespace
}  // namespace steinflow
