#include <gtest/gtest.h>

#include <Eigen/LU>
#include <cmath>
#include <numbers>

#include "dftrack/density.hpp"
#include "dftrack/error.hpp"
#include "gen.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace dft;
using dtest::Gen;

namespace {

GaussianDensity random_density(Gen& gen, int d) {
  Eigen::MatrixXd a = gen.normal_matrix(d, d);
  Eigen::MatrixXd cov = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
  return GaussianDensity(gen.normal_vector(d), cov);
}

}  // namespace

TEST(Gaussian, UnivariateFixtures) {
  GaussianDensity g(Eigen::VectorXd::Zero(1), Eigen::MatrixXd(Eigen::MatrixXd::Identity(1, 1)));
  EXPECT_NEAR(g.nll(Eigen::VectorXd::Zero(1)), 0.9189385332046727, 1e-15);
  EXPECT_NEAR(g.nll(Eigen::VectorXd::Constant(1, 2.0)), 2.9189385332046727, 1e-15);
  GaussianDensity g4(Eigen::VectorXd::Zero(1), Eigen::MatrixXd(Eigen::MatrixXd::Constant(1, 1, 4.0)));
  EXPECT_DOUBLE_EQ(g4.nll_grad(Eigen::VectorXd::Constant(1, 2.0))[0], 0.5);
  EXPECT_EQ(g4.nll_grad(Eigen::VectorXd::Zero(1))[0], 0.0);
}

TEST(Gaussian, NllAtMeanIsNormalizer) {
  Gen gen(81);
  for (int t = 0; t < 50; ++t) {
    GaussianDensity g = random_density(gen, gen.integer(1, 10));
    double direct = 0.5 * std::log((2 * std::numbers::pi * g.covariance()).determinant());
    EXPECT_NEAR(g.nll(g.mean()), g.normalizer(), 1e-12);
    EXPECT_NEAR(g.normalizer(), direct, 1e-9 * (1 + std::abs(direct)));
    EXPECT_NEAR(g.log_det(), std::log(g.covariance().determinant()), 1e-9);
  }
}

TEST(Gaussian, NllIsHalfMahalanobisPlusNormalizer) {
  Gen gen(82);
  for (int t = 0; t < 100; ++t) {
    int d = gen.integer(1, 12);
    GaussianDensity g = random_density(gen, d);
    Eigen::VectorXd c = gen.normal_vector(d, 2.0);
    Eigen::VectorXd r = c - g.mean();
    double m2 = r.dot(g.covariance().inverse() * r);
    EXPECT_NEAR(g.mahalanobis_sq(c), m2, 1e-9 * (1 + m2));
    EXPECT_NEAR(g.nll(c) - g.nll(g.mean()), 0.5 * m2, 1e-9 * (1 + m2));
  }
}

TEST(Gaussian, GradientMatchesFiniteDifferences) {
  Gen gen(83);
  for (int t = 0; t < 100; ++t) {
    int d = gen.integer(1, 10);
    for (bool diag : {false, true}) {
      GaussianDensity g = diag ? GaussianDensity(gen.normal_vector(d),
                                                 Eigen::VectorXd(gen.normal_vector(d).array().abs() + 0.3))
                               : random_density(gen, d);
      Eigen::VectorXd c = gen.normal_vector(d, 2.0);
      Eigen::VectorXd analytic = g.nll_grad(c);
      Eigen::VectorXd fd = dtest::fd_gradient([&](const Eigen::VectorXd& v) { return g.nll(v); }, c, 1e-5);
      EXPECT_LE((analytic - fd).norm(), 1e-7 * std::max(1.0, analytic.norm()));
    }
  }
}

TEST(Gaussian, TwoDimensionalDensityIntegratesToOne) {
  Gen gen(84);
  Eigen::MatrixXd cov(2, 2);
  cov << 1.5, 0.6, 0.6, 0.8;
  GaussianDensity g(Eigen::Vector2d(0.3, -0.2), cov);
  const double lo = -9, hi = 9;
  const int n = 601;
  const double h = (hi - lo) / (n - 1);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double w = (i == 0 || i == n - 1 ? 0.5 : 1.0) * (j == 0 || j == n - 1 ? 0.5 : 1.0);
      sum += w * std::exp(-g.nll(Eigen::Vector2d(lo + i * h, lo + j * h)));
    }
  }
  EXPECT_NEAR(sum * h * h, 1.0, 1e-6);
}

TEST(Gaussian, BatchMatchesSingle) {
  Gen gen(85);
  GaussianDensity g = random_density(gen, 6);
  Eigen::MatrixXd c = gen.normal_matrix(6, 20);
  Eigen::VectorXd b = g.nll_batch(c);
  for (int j = 0; j < 20; ++j) EXPECT_NEAR(b[j], g.nll(c.col(j)), 1e-10);
}

TEST(Gaussian, DiagonalMatchesFullWithDiagonalMatrix) {
  Gen gen(86);
  Eigen::VectorXd var = gen.normal_vector(5).array().abs() + 0.2;
  Eigen::VectorXd mu = gen.normal_vector(5);
  GaussianDensity diag(mu, var);
  GaussianDensity full(mu, Eigen::MatrixXd(var.asDiagonal()));
  EXPECT_EQ(diag.kind(), CovarianceKind::kDiagonal);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd c = gen.normal_vector(5);
    EXPECT_NEAR(diag.nll(c), full.nll(c), 1e-12);
    EXPECT_LE((diag.nll_grad(c) - full.nll_grad(c)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Gaussian, RejectsInvalidCovariance) {
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  EXPECT_THROW(GaussianDensity(Eigen::VectorXd::Zero(2), bad), FitError);
  EXPECT_THROW(GaussianDensity(Eigen::VectorXd::Zero(2), Eigen::VectorXd(Eigen::Vector2d(1, 0))), FitError);
  EXPECT_THROW(GaussianDensity(Eigen::VectorXd::Zero(3), Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2))), ContractError);
  GaussianDensity ok(Eigen::VectorXd::Zero(2), Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_THROW(ok.nll(Eigen::VectorXd::Zero(3)), ContractError);
}

TEST(Fit, MeanFixture) {
  Eigen::MatrixXd s(2, 2);
  s << 0, 2, 0, 2;
  GaussianDensity g = fit_gaussian(s, CovarianceKind::kFull);
  EXPECT_EQ(g.mean(), Eigen::Vector2d(1, 1));
  // MLE covariance is all ones; shrinkage adds 1e-6 * trace / d = 1e-6.
  EXPECT_NEAR(g.covariance()(0, 0), 1.0 + 1e-6, 1e-15);
  EXPECT_NEAR(g.covariance()(0, 1), 1.0, 1e-15);
}

TEST(Fit, PerfectlyCorrelatedOffDiagonal) {
  Gen gen(87);
  const int n = 1000;
  Eigen::MatrixXd s(2, n);
  for (int i = 0; i < n; ++i) {
    double z = gen.normal();
    s(0, i) = 2 * z;
    s(1, i) = 3 * z + 1;
  }
  GaussianDensity g = fit_gaussian(s, CovarianceKind::kFull);
  Eigen::MatrixXd cov = g.covariance();
  double eps = 1e-6 * (cov(0, 0) + cov(1, 1)) / 2;
  double v0 = cov(0, 0) - eps, v1 = cov(1, 1) - eps;
  EXPECT_NEAR(cov(0, 1), std::sqrt(v0 * v1), 1e-5 * cov(0, 1));
}

TEST(Fit, DiagonalLawOfLargeNumbers) {
  Gen gen(88);
  const int n = 100000;
  Eigen::MatrixXd s(2, n);
  for (int i = 0; i < n; ++i) {
    s(0, i) = gen.normal(1.0);
    s(1, i) = gen.normal(2.0);
  }
  GaussianDensity g = fit_gaussian(s, CovarianceKind::kDiagonal);
  EXPECT_EQ(g.kind(), CovarianceKind::kDiagonal);
  EXPECT_NEAR(g.variances()[0], 1.0, 0.05);
  EXPECT_NEAR(g.variances()[1], 4.0, 0.2);
}

TEST(Fit, ShrinkageRule) {
  Gen gen(89);
  Eigen::MatrixXd s = gen.normal_matrix(4, 50);
  Eigen::VectorXd mu = s.rowwise().mean();
  Eigen::MatrixXd c = s.colwise() - mu;
  Eigen::MatrixXd mle = c * c.transpose() / 50.0;
  double eps = kCovarianceShrinkage * mle.trace() / 4;
  GaussianDensity full = fit_gaussian(s, CovarianceKind::kFull);
  EXPECT_LE((full.covariance() - mle - eps * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-14);
  GaussianDensity diag = fit_gaussian(s, CovarianceKind::kDiagonal);
  EXPECT_LE((diag.variances() - mle.diagonal() - Eigen::VectorXd::Constant(4, eps)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Fit, RankDeficientSamplesStayInvertible) {
  Gen gen(90);
  Eigen::MatrixXd s = gen.normal_matrix(20, 5);
  GaussianDensity g = fit_gaussian(s, CovarianceKind::kFull);
  EXPECT_TRUE(std::isfinite(g.nll(gen.normal_vector(20))));
}

TEST(Fit, Errors) {
  EXPECT_THROW(fit_gaussian(Eigen::MatrixXd::Zero(3, 1), CovarianceKind::kFull), FitError);
  EXPECT_THROW(parse_covariance_kind("mixture"), ConfigError);
  EXPECT_EQ(parse_covariance_kind("diag"), CovarianceKind::kDiagonal);
  EXPECT_EQ(parse_covariance_kind("full"), CovarianceKind::kFull);
}

TEST(Fit, FullDominatesDiagonalOnTrainingData) {
  Gen gen(91);
  for (int t = 0; t < 20; ++t) {
    int d = gen.integer(2, 8);
    Eigen::MatrixXd mix = gen.normal_matrix(d, d);
    Eigen::MatrixXd s = mix * gen.normal_matrix(d, 300);
    GaussianDensity full = fit_gaussian(s, CovarianceKind::kFull);
    GaussianDensity diag = fit_gaussian(s, CovarianceKind::kDiagonal);
    EXPECT_LE(full.nll_batch(s).mean(), diag.nll_batch(s).mean() + 1e-9);
  }
}

TEST(Fit, DeterministicAndSymmetric) {
  Gen gen(92);
  Eigen::MatrixXd a = gen.normal_matrix(5, 40), b = gen.normal_matrix(5, 60, 2.0);
  EXPECT_TRUE(fit_gaussian(a, CovarianceKind::kFull) == fit_gaussian(a, CovarianceKind::kFull));
  GaussianDensity fa = fit_gaussian(a, CovarianceKind::kFull), fb = fit_gaussian(b, CovarianceKind::kFull);
  EXPECT_FALSE(fa == fb);
}

TEST(Gaussian, WithMeanShiftsOnlyMean) {
  Gen gen(93);
  GaussianDensity g = random_density(gen, 4);
  Eigen::VectorXd delta = gen.normal_vector(4);
  GaussianDensity s = g.with_mean(g.mean() + delta);
  Eigen::VectorXd c = gen.normal_vector(4);
  EXPECT_NEAR(s.nll(c + delta), g.nll(c), 1e-12);
}

TEST(Gaussian, SaveLoadRoundtrip) {
  dtest::TempDir dir;
  Gen gen(94);
  for (auto kind : {CovarianceKind::kFull, CovarianceKind::kDiagonal}) {
    GaussianDensity g = fit_gaussian(gen.normal_matrix(6, 30), kind);
    g.save(dir.path() / "g.bin");
    GaussianDensity back = GaussianDensity::load(dir.path() / "g.bin");
    EXPECT_TRUE(back == g);
    Eigen::VectorXd c = gen.normal_vector(6);
    EXPECT_EQ(back.nll(c), g.nll(c));
  }
}
