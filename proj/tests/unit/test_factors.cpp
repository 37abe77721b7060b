#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "dftrack/density.hpp"
#include "dftrack/encoder.hpp"
#include "dftrack/error.hpp"
#include "dftrack/factors.hpp"
#include "dftrack/rae.hpp"
#include "dftrack/warp.hpp"
#include "gen.hpp"
#include "oracles.hpp"

using namespace dft;
using dtest::Gen;

namespace {

PatchSpec small_spec() {
  PatchSpec s;
  s.box_width = 24.0;
  s.box_height = 16.0;
  s.grid_cols = 12;
  s.grid_rows = 8;
  return s;
}

GaussianDensity random_density(Gen& gen, int d) {
  Eigen::MatrixXd a = gen.normal_matrix(d, d);
  Eigen::MatrixXd cov = a * a.transpose() / d + 0.5 * Eigen::MatrixXd::Identity(d, d);
  return GaussianDensity(gen.normal_vector(d), cov);
}

std::shared_ptr<const Encoder> make_encoder(EncoderKind kind, Gen& gen, int n) {
  switch (kind) {
    case EncoderKind::kRandomProjection:
      return std::make_shared<RandomProjectionEncoder>(n, 16, 5);
    case EncoderKind::kPpca: {
      Eigen::MatrixXd basis = gen.normal_matrix(n, 8);
      Eigen::MatrixXd data = basis * gen.normal_matrix(8, 300) + gen.normal_matrix(n, 300, 0.1);
      return ppca_fit(data, 8).model;
    }
    case EncoderKind::kRae: {
      RaeConfig c;
      c.code_dim = 8;
      c.hidden = {32};
      c.seed = 3;
      return std::make_shared<RaeEncoder>(RaeModel(n, c));
    }
  }
  return nullptr;
}

double norm_rel(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-12);
}

}  // namespace

TEST(MotionFactor, Fixtures) {
  MotionFactor f(TangentCovariance::identity());
  Pose2 g(3, -2, 0.4);
  EXPECT_EQ(f.energy(g, g), 0.0);
  EXPECT_NEAR(f.energy(g, compose(g, exp(Tangent2(3, 4, 0)))), 25.0, 1e-12);
  auto [d1, d2] = f.gradient(g, g);
  EXPECT_EQ(d1.v, Eigen::Vector3d::Zero());
  EXPECT_EQ(d2.v, Eigen::Vector3d::Zero());
}

TEST(MotionFactor, EqualsComposedPrimitives) {
  Gen gen(101);
  for (int i = 0; i < 200; ++i) {
    TangentCovariance q(gen.spd3());
    MotionFactor f(q);
    Pose2 a = gen.pose(), b = gen.pose();
    EXPECT_DOUBLE_EQ(f.energy(a, b), mahalanobis_sq(log(between(a, b)), q));
  }
}

TEST(MotionFactor, LeftInvariant) {
  Gen gen(102);
  for (int i = 0; i < 500; ++i) {
    MotionFactor f(TangentCovariance(gen.spd3()));
    Pose2 a = gen.pose(), b = compose(a, exp(gen.tangent(5.0, 2.0))), h = gen.pose(100.0);
    double e = f.energy(a, b);
    EXPECT_NEAR(f.energy(compose(h, a), compose(h, b)), e, 1e-9 * (1 + e));
  }
}

TEST(MotionFactor, GradientMatchesFiniteDifferences) {
  Gen gen(103);
  for (int i = 0; i < 200; ++i) {
    MotionFactor f(TangentCovariance(gen.spd3()));
    Pose2 a = gen.pose(), b = compose(a, exp(gen.tangent(8.0, 2.5)));
    auto [ga, gb] = f.gradient(a, b);
    Eigen::Vector3d fa =
        dtest::fd_pose_gradient([&](const Pose2& g) { return f.energy(g, b); }, a, 1e-5, 1e-5);
    Eigen::Vector3d fb =
        dtest::fd_pose_gradient([&](const Pose2& g) { return f.energy(a, g); }, b, 1e-5, 1e-5);
    EXPECT_LE(norm_rel(ga.v, fa), 1e-4) << ga.v.transpose() << " vs " << fa.transpose();
    EXPECT_LE(norm_rel(gb.v, fb), 1e-4) << gb.v.transpose() << " vs " << fb.transpose();
  }
}

TEST(MotionFactor, SmallOffsetGradientIsTwiceOffset) {
  Gen gen(104);
  MotionFactor f(TangentCovariance::identity());
  for (int i = 0; i < 100; ++i) {
    Pose2 a = gen.pose();
    Tangent2 xi(gen.normal_vector(3, 1e-4));
    Tangent2 g2 = f.gradient(a, compose(a, exp(xi))).second;
    // The remainder is second order in xi.
    EXPECT_LE((g2.v - 2.0 * xi.v).norm(), 1e-3 * xi.v.norm());
  }
}

TEST(PriorFactor, GradientMatchesFiniteDifferences) {
  Gen gen(105);
  for (int i = 0; i < 100; ++i) {
    PriorFactor f(gen.pose(), TangentCovariance(gen.spd3()));
    Pose2 g = compose(f.anchor(), exp(gen.tangent(4.0, 1.0)));
    Eigen::Vector3d fd =
        dtest::fd_pose_gradient([&](const Pose2& p) { return f.energy(p); }, g, 1e-5, 1e-5);
    EXPECT_LE(norm_rel(f.gradient(g).v, fd), 1e-4);
  }
  PriorFactor f(Pose2(1, 2, 0.3), TangentCovariance::identity());
  EXPECT_EQ(f.energy(Pose2(1, 2, 0.3)), 0.0);
}

TEST(AppearanceFactor, Fixtures) {
  AppearanceFactor f(Eigen::Vector2d(1.0, 1.0));
  const double c = std::log(2.0 * M_PI);
  EXPECT_NEAR(f.constant(), c, 1e-15);
  Eigen::VectorXd a = Eigen::Vector2d(0.3, -0.2);
  EXPECT_DOUBLE_EQ(f.energy(a, a), f.constant());
  EXPECT_NEAR(f.energy(a, a + Eigen::Vector2d(1, 1)), c + 1.0, 1e-12);
  EXPECT_THROW(AppearanceFactor(Eigen::Vector2d(1.0, 0.0)), ConfigError);
}

TEST(AppearanceFactor, GradientMatchesFiniteDifferences) {
  Gen gen(106);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd var = gen.normal_vector(6).array().abs() + 0.1;
    AppearanceFactor f(var);
    Eigen::VectorXd a1 = gen.normal_vector(6), a2 = gen.normal_vector(6);
    auto [g1, g2] = f.gradient(a1, a2);
    auto f1 = dtest::fd_gradient([&](const Eigen::VectorXd& v) { return f.energy(v, a2); }, a1, 1e-6);
    auto f2 = dtest::fd_gradient([&](const Eigen::VectorXd& v) { return f.energy(a1, v); }, a2, 1e-6);
    EXPECT_LE((g1 - f1).norm(), 1e-6 * g1.norm() + 1e-9);
    EXPECT_LE((g2 - f2).norm(), 1e-6 * g2.norm() + 1e-9);
  }
}

TEST(LikelihoodFactor, RejectsDimensionMismatch) {
  Gen gen(107);
  auto enc = std::make_shared<RandomProjectionEncoder>(small_spec().dim(), 16, 1);
  EXPECT_THROW(LikelihoodFactor(enc, random_density(gen, 16), random_density(gen, 15), small_spec()),
               ContractError);
  PatchSpec other = small_spec();
  other.grid_cols = 10;
  EXPECT_THROW(LikelihoodFactor(enc, random_density(gen, 16), random_density(gen, 16), other),
               ContractError);
}

TEST(LikelihoodFactor, EqualDensitiesGiveZero) {
  Gen gen(108);
  PatchSpec spec = small_spec();
  auto enc = make_encoder(EncoderKind::kPpca, gen, spec.dim());
  GaussianDensity p = random_density(gen, enc->dim());
  LikelihoodFactor unbound(enc, p, p, spec);
  GrayImage img = gen.smooth_image(80, 80);
  LikelihoodFactor f = unbound.bind(img);
  for (int i = 0; i < 50; ++i) {
    Pose2 g = gen.pose_in(25, 55, 25, 55);
    EXPECT_EQ(f.energy(g), 0.0);
    EXPECT_EQ(f.gradient(g).v, Eigen::Vector3d::Zero());
  }
}

TEST(LikelihoodFactor, EqualsManualComposition) {
  Gen gen(109);
  PatchSpec spec = small_spec();
  for (auto kind : {EncoderKind::kRandomProjection, EncoderKind::kPpca, EncoderKind::kRae}) {
    auto enc = make_encoder(kind, gen, spec.dim());
    GaussianDensity fg = random_density(gen, enc->dim()), bg = random_density(gen, enc->dim());
    GrayImage img = gen.smooth_image(80, 80);
    LikelihoodFactor f = LikelihoodFactor(enc, fg, bg, spec).bind(img);
    for (int i = 0; i < 20; ++i) {
      Pose2 g = gen.pose_in(25, 55, 25, 55);
      Eigen::VectorXd c = enc->encode(extract(g, img, spec).values);
      double ref = fg.nll(c) - bg.nll(c);
      EXPECT_NEAR(f.energy(g), ref, 1e-10 * (1 + std::abs(ref)));
      auto ev = f.evaluate(g, nullptr, false);
      EXPECT_NEAR(ev.fg_nll, fg.nll(c), 1e-10 * (1 + std::abs(ref)));
      EXPECT_NEAR(ev.bg_nll, bg.nll(c), 1e-10 * (1 + std::abs(ref)));
      // Appearance offset shifts the foreground mean.
      Eigen::VectorXd a = gen.normal_vector(enc->dim(), 0.3);
      double shifted = fg.with_mean(fg.mean() + a).nll(c) - bg.nll(c);
      EXPECT_NEAR(f.energy(g, &a), shifted, 1e-10 * (1 + std::abs(shifted)));
    }
  }
}

TEST(LikelihoodFactor, BatchMatchesSingle) {
  Gen gen(110);
  PatchSpec spec = small_spec();
  auto enc = make_encoder(EncoderKind::kRae, gen, spec.dim());
  GrayImage img = gen.smooth_image(80, 80);
  LikelihoodFactor f =
      LikelihoodFactor(enc, random_density(gen, 8), random_density(gen, 8), spec).bind(img);
  std::vector<Pose2> poses;
  for (int i = 0; i < 30; ++i) poses.push_back(gen.pose_in(25, 55, 25, 55));
  Eigen::VectorXd e = f.energy_batch(poses);
  for (int i = 0; i < 30; ++i) EXPECT_NEAR(e[i], f.energy(poses[i]), 1e-9 * (1 + std::abs(e[i])));
}

class LikelihoodGradient : public ::testing::TestWithParam<EncoderKind> {};

TEST_P(LikelihoodGradient, MatchesFiniteDifferences) {
  const EncoderKind kind = GetParam();
  const double tol = kind == EncoderKind::kRae ? 1e-3 : 1e-5;
  Gen gen(111 + static_cast<int>(kind));
  PatchSpec spec = small_spec();
  auto enc = make_encoder(kind, gen, spec.dim());
  for (int i = 0; i < 100; ++i) {
    GaussianDensity fg = random_density(gen, enc->dim()), bg = random_density(gen, enc->dim());
    GrayImage img = gen.bilinear_exact_image(80, 80);
    LikelihoodFactor f = LikelihoodFactor(enc, fg, bg, spec).bind(img);
    Pose2 g = gen.pose_in(25, 55, 25, 55);
    Eigen::Vector3d analytic = f.gradient(g).v;
    Eigen::Vector3d fd = dtest::fd_pose_gradient([&](const Pose2& p) { return f.energy(p); }, g);
    EXPECT_LE(norm_rel(analytic, fd), tol) << analytic.transpose() << " vs " << fd.transpose();
  }
}

INSTANTIATE_TEST_SUITE_P(Encoders, LikelihoodGradient,
                         ::testing::Values(EncoderKind::kRandomProjection, EncoderKind::kPpca,
                                           EncoderKind::kRae),
                         [](const auto& info) { return std::string(encoder_kind_name(info.param)); });

TEST(LikelihoodFactor, AppearanceGradientMatchesFiniteDifferences) {
  Gen gen(115);
  PatchSpec spec = small_spec();
  auto enc = make_encoder(EncoderKind::kPpca, gen, spec.dim());
  GrayImage img = gen.smooth_image(80, 80);
  for (int i = 0; i < 100; ++i) {
    LikelihoodFactor f =
        LikelihoodFactor(enc, random_density(gen, 8), random_density(gen, 8), spec).bind(img);
    Pose2 g = gen.pose_in(25, 55, 25, 55);
    Eigen::VectorXd a = gen.normal_vector(8, 0.5);
    Eigen::VectorXd analytic = f.evaluate(g, &a).appearance_gradient;
    Eigen::VectorXd fd =
        dtest::fd_gradient([&](const Eigen::VectorXd& v) { return f.energy(g, &v); }, a, 1e-6);
    EXPECT_LE((analytic - fd).norm(), 1e-6 * analytic.norm() + 1e-9);
  }
}

TEST(LikelihoodFactor, RandomProjectionClosedForm) {
  Gen gen(116);
  PatchSpec spec = small_spec();
  auto enc = std::make_shared<RandomProjectionEncoder>(spec.dim(), 16, 9);
  for (int i = 0; i < 100; ++i) {
    GaussianDensity fg = random_density(gen, 16), bg = random_density(gen, 16);
    GrayImage img = gen.smooth_image(80, 80);
    LikelihoodFactor f = LikelihoodFactor(enc, fg, bg, spec).bind(img);
    Pose2 g = gen.pose_in(25, 55, 25, 55);
    Patch p = extract(g, img, spec);
    // c = A^T x / sqrt(k), so dE/dx = A (S_F^-1 (c - mu_F) - S_B^-1 (c - mu_B)) / sqrt(k).
    const Eigen::MatrixXd& a = enc->matrix();
    Eigen::VectorXd c = a.transpose() * p.values / std::sqrt(16.0);
    Eigen::VectorXd dc = fg.covariance().ldlt().solve(c - fg.mean()) -
                         bg.covariance().ldlt().solve(c - bg.mean());
    Eigen::VectorXd dx = a * dc / std::sqrt(16.0);
    Eigen::Vector3d ref = pullback_pose_gradient(p, dx, g, img, spec).v;
    EXPECT_LE(norm_rel(f.gradient(g).v, ref), 1e-9);
  }
}

TEST(LikelihoodFactor, DependsOnlyOnFootprint) {
  Gen gen(117);
  PatchSpec spec = small_spec();
  auto enc = make_encoder(EncoderKind::kRae, gen, spec.dim());
  for (int i = 0; i < 20; ++i) {
    GrayImage img = gen.smooth_image(80, 80);
    LikelihoodFactor unbound(enc, random_density(gen, 8), random_density(gen, 8), spec);
    Pose2 g = gen.pose_in(25, 55, 25, 55);
    double e = unbound.bind(img).energy(g);
    std::vector<char> keep(80 * 80, 0);
    for (const auto& uv : extract(g, img, spec).coords) {
      int u0 = static_cast<int>(std::floor(uv.x())), v0 = static_cast<int>(std::floor(uv.y()));
      for (int v = v0 - 1; v <= v0 + 2; ++v)
        for (int u = u0 - 1; u <= u0 + 2; ++u)
          if (u >= 0 && v >= 0 && u < 80 && v < 80) keep[v * 80 + u] = 1;
    }
    GrayImage other = img;
    int replaced = 0;
    for (int k = 0; k < 80 * 80; ++k) {
      if (!keep[k]) {
        other.data()[k] = static_cast<float>(gen.uniform(0, 1));
        ++replaced;
      }
    }
    ASSERT_GT(replaced, 1000);
    EXPECT_EQ(unbound.bind(other).energy(g), e);
  }
}

TEST(ChainEnergy, EmptyIsZero) {
  ChainEnergy chain;
  EXPECT_EQ(chain.energy(), 0.0);
  chain.add_state(Pose2(1, 2, 3));
  EXPECT_EQ(chain.energy(), 0.0);
  EXPECT_EQ(chain.gradient().poses[0].v, Eigen::Vector3d::Zero());
}

TEST(ChainEnergy, SingleMotionFactor) {
  Gen gen(118);
  MotionFactor f(TangentCovariance(gen.spd3()));
  ChainEnergy chain;
  Pose2 a = gen.pose(), b = gen.pose();
  int i = chain.add_state(a);
  int j = chain.add_state(b);
  chain.add_motion(i, j, f);
  EXPECT_EQ(chain.energy(), f.energy(a, b));
  ChainGradient g = chain.gradient();
  EXPECT_EQ(g.poses[0].v, f.gradient(a, b).first.v);
  EXPECT_EQ(g.poses[1].v, f.gradient(a, b).second.v);
}

TEST(ChainEnergy, RejectsUnknownVariable) {
  ChainEnergy chain;
  chain.add_state(Pose2());
  EXPECT_THROW(chain.add_motion(0, 1, MotionFactor(TangentCovariance::identity())), ContractError);
}

namespace {

struct ThreeFrameChain {
  std::vector<GrayImage> frames;
  ChainEnergy chain;
};

// Prior, two motion factors, a likelihood per frame and an appearance walk.
std::unique_ptr<ThreeFrameChain> make_chain(Gen& gen, const std::shared_ptr<const Encoder>& enc,
                                            const PatchSpec& spec) {
  auto out = std::make_unique<ThreeFrameChain>();
  for (int k = 0; k < 3; ++k) out->frames.push_back(gen.bilinear_exact_image(80, 80));
  LikelihoodFactor lik(enc, random_density(gen, enc->dim()), random_density(gen, enc->dim()), spec);
  MotionFactor motion(TangentCovariance(gen.spd3()));
  Eigen::VectorXd qa = gen.normal_vector(enc->dim()).array().abs() + 0.2;
  Pose2 g = gen.pose_in(30, 50, 30, 50);
  for (int k = 0; k < 3; ++k) {
    out->chain.add_state(g, gen.normal_vector(enc->dim(), 0.3));
    out->chain.add_likelihood(k, lik.bind(out->frames[k]));
    g = compose(g, exp(gen.tangent(2.0, 0.1)));
  }
  out->chain.add_prior(0, PriorFactor(gen.pose_in(30, 50, 30, 50), TangentCovariance(gen.spd3())));
  for (int k = 0; k < 2; ++k) {
    out->chain.add_motion(k, k + 1, motion);
    out->chain.add_appearance(k, k + 1, AppearanceFactor(qa));
  }
  return out;
}

}  // namespace

TEST(ChainEnergy, GradientMatchesFiniteDifferences) {
  Gen gen(119);
  PatchSpec spec = small_spec();
  auto enc = make_encoder(EncoderKind::kRandomProjection, gen, spec.dim());
  for (int t = 0; t < 100; ++t) {
    auto c = make_chain(gen, enc, spec);
    ChainEnergy& chain = c->chain;
    ChainGradient grad = chain.gradient();
    Eigen::VectorXd analytic(9), fd(9);
    for (int k = 0; k < 3; ++k) {
      analytic.segment<3>(3 * k) = grad.poses[k].v;
      const Pose2 base = chain.poses()[k];
      fd.segment<3>(3 * k) = dtest::fd_pose_gradient(
          [&](const Pose2& p) {
            chain.poses()[k] = p;
            double e = chain.energy();
            chain.poses()[k] = base;
            return e;
          },
          base);
    }
    EXPECT_LE((analytic - fd).norm(), 1e-5 * analytic.norm());
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd a = *chain.appearances()[k];
      Eigen::VectorXd afd = dtest::fd_gradient(
          [&](const Eigen::VectorXd& v) {
            chain.appearances()[k] = v;
            double e = chain.energy();
            chain.appearances()[k] = a;
            return e;
          },
          a, 1e-6);
      EXPECT_LE((grad.appearances[k] - afd).norm(), 1e-6 * afd.norm() + 1e-8);
    }
  }
}

TEST(ChainEnergy, InvariantToFactorOrder) {
  Gen gen(120);
  PatchSpec spec = small_spec();
  auto enc = make_encoder(EncoderKind::kRae, gen, spec.dim());
  for (int t = 0; t < 20; ++t) {
    auto c = make_chain(gen, enc, spec);
    double e = c->chain.energy();
    ChainGradient g = c->chain.gradient();
    c->chain.reverse_factor_order();
    EXPECT_NEAR(c->chain.energy(), e, 1e-12 * (1 + std::abs(e)));
    ChainGradient r = c->chain.gradient();
    for (int k = 0; k < 3; ++k) {
      EXPECT_LE((r.poses[k].v - g.poses[k].v).norm(), 1e-12 * (1 + g.poses[k].v.norm()));
    }
  }
}
