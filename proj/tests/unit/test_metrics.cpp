#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "dftrack/error.hpp"
#include "dftrack/metrics.hpp"
#include "gen.hpp"
#include "oracles.hpp"

using namespace dft;
using dtest::Gen;

namespace {

Trajectory make_track(const std::vector<Pose2>& poses, int first = 0) {
  Trajectory t;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    TrajectoryEntry e;
    e.frame = first + static_cast<int>(i);
    e.pose = poses[i];
    t.append(e);
  }
  return t;
}

OrientedBox moved(const OrientedBox& b, const Pose2& h) {
  return {compose(h, b.pose), b.width, b.height};
}

}  // namespace

TEST(Polygon, AreaAndClip) {
  Polygon sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_DOUBLE_EQ(polygon_area(sq), 4.0);
  Polygon tri{{0, 0}, {1, 0}, {0, 1}};
  EXPECT_DOUBLE_EQ(polygon_area(tri), 0.5);
  Polygon other{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  EXPECT_NEAR(polygon_area(clip_convex(sq, other)), 1.0, 1e-12);
  Polygon far{{10, 10}, {11, 10}, {11, 11}, {10, 11}};
  EXPECT_EQ(polygon_area(clip_convex(sq, far)), 0.0);
}

TEST(ObbIou, Fixtures) {
  OrientedBox a{Pose2(3, 4, 0.7), 10, 6};
  EXPECT_NEAR(obb_iou(a, a), 1.0, 1e-12);
  OrientedBox p{Pose2(0, 0, 0), 10, 10}, q{Pose2(1000, 0, 0), 10, 10};
  EXPECT_EQ(obb_iou(p, q), 0.0);
  OrientedBox u{Pose2(0, 0, 0), 1, 1}, v{Pose2(0.5, 0, 0), 1, 1};
  EXPECT_NEAR(obb_intersection_area(u, v), 0.5, 1e-12);
  EXPECT_NEAR(obb_iou(u, v), 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(dtest::mc_iou(u, v, 1000000, 1), 1.0 / 3.0, 0.002);
}

TEST(ObbIou, NestedAndRotatedFixtures) {
  OrientedBox big{Pose2(0, 0, 0), 4, 4}, small{Pose2(0.5, -0.5, 0.3), 1, 1};
  EXPECT_NEAR(obb_iou(big, small), 1.0 / 16.0, 1e-12);
  // A square rotated by 45 degrees over the same square: the overlap is a
  // regular octagon of area 2 (sqrt 2 - 1) s^2.
  OrientedBox s{Pose2(0, 0, 0), 2, 2}, r{Pose2(0, 0, M_PI / 4), 2, 2};
  const double inter = 8.0 * (std::sqrt(2.0) - 1.0);
  EXPECT_NEAR(obb_intersection_area(s, r), inter, 1e-12);
  EXPECT_NEAR(obb_iou(s, r), inter / (8.0 - inter), 1e-12);
}

TEST(ObbIou, SymmetricBoundedAndRigidInvariant) {
  Gen gen(301);
  for (int i = 0; i < 2000; ++i) {
    OrientedBox a = gen.box(), b = gen.box();
    const double ab = obb_iou(a, b);
    EXPECT_NEAR(ab, obb_iou(b, a), 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    Pose2 h = gen.pose(200.0);
    EXPECT_NEAR(obb_iou(moved(a, h), moved(b, h)), ab, 1e-9);
  }
}

TEST(ObbIou, OneOnlyForCoincidentBoxes) {
  Gen gen(302);
  for (int i = 0; i < 500; ++i) {
    OrientedBox a = gen.box();
    OrientedBox flipped{compose(a.pose, Pose2(0, 0, M_PI)), a.width, a.height};
    EXPECT_NEAR(obb_iou(a, flipped), 1.0, 1e-9);
    OrientedBox shifted{compose(a.pose, exp(gen.tangent(0.5, 0.05))), a.width, a.height};
    EXPECT_LT(obb_iou(a, shifted), 1.0 - 1e-6);
  }
}

TEST(ObbIou, MatchesMonteCarloOracle) {
  Gen gen(303);
  const int n = 200000;
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    OrientedBox a = gen.box(5.0, 4.0, 20.0), b = gen.box(5.0, 4.0, 20.0);
    const double iou = obb_iou(a, b);
    const double inter = obb_intersection_area(a, b);
    const double p = inter / a.area();
    // Propagate the binomial standard error of the hit fraction into IoU.
    const double sd_inter = a.area() * std::sqrt(std::max(p * (1 - p), 1e-12) / n);
    const double u = a.area() + b.area() - inter;
    const double sd_iou = sd_inter * (a.area() + b.area()) / (u * u);
    EXPECT_NEAR(dtest::mc_iou(a, b, n, 1000 + i), iou, 3 * sd_iou + 1e-12) << i;
    checked += iou > 0.0;
  }
  EXPECT_GT(checked, 50);
}

TEST(ScoreSequence, PerfectTracker) {
  Gen gen(304);
  std::vector<Pose2> poses;
  for (int i = 0; i < 20; ++i) poses.push_back(gen.pose());
  Trajectory t = make_track(poses);
  SequenceResult r = score_sequence(t, t, 70, 40);
  EXPECT_FALSE(r.failure_index.has_value());
  for (double o : r.overlaps) EXPECT_NEAR(o, 1.0, 1e-12);
  EXPECT_NEAR(accuracy({r}), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(robustness({r}), 1.0);
  EXPECT_NEAR(eao({r}, default_eao_interval(20)), 1.0, 1e-12);
  EXPECT_NEAR(eao({r}, {1, 20}), 1.0, 1e-12);
}

TEST(ScoreSequence, FrozenPredictionFailsWhenTruthLeaves) {
  std::vector<Pose2> truth, frozen;
  for (int i = 0; i < 10; ++i) {
    truth.push_back(Pose2(100 + 10.0 * i, 50, 0));
    frozen.push_back(Pose2(100, 50, 0));
  }
  SequenceResult r = score_sequence(make_track(frozen, 5), make_track(truth, 5), 20, 10);
  ASSERT_TRUE(r.failure_index.has_value());
  EXPECT_EQ(*r.failure_index, 2);
  EXPECT_NEAR(r.overlaps[1], 1.0 / 3.0, 1e-12);
  for (std::size_t i = 2; i < r.overlaps.size(); ++i) EXPECT_EQ(r.overlaps[i], 0.0);
  EXPECT_EQ(r.frames.front(), 5);
  EXPECT_EQ(r.successful_frames(), 2u);
}

TEST(ScoreSequence, OverlapsAgreeWithMonteCarlo) {
  Gen gen(305);
  std::vector<Pose2> truth, pred;
  for (int i = 0; i < 30; ++i) {
    truth.push_back(gen.pose(100.0));
    pred.push_back(compose(truth.back(), exp(gen.tangent(8.0, 0.3))));
  }
  Trajectory tt = make_track(truth), tp = make_track(pred);
  SequenceResult r = score_sequence(tp, tt, 30, 20);
  for (std::size_t i = 0; i < r.length(); ++i) {
    if (r.failure_index && static_cast<int>(i) >= *r.failure_index) break;
    double mc = dtest::mc_iou({pred[i], 30, 20}, {truth[i], 30, 20}, 400000, 77 + i);
    EXPECT_NEAR(r.overlaps[i], mc, 0.005) << i;
  }
}

TEST(ScoreSequence, MismatchedFramesRejected) {
  Trajectory a = make_track({Pose2(), Pose2()}, 0);
  Trajectory b = make_track({Pose2(), Pose2()}, 1);
  EXPECT_THROW(score_sequence(a, b, 10, 10), EvaluationError);
  Trajectory c = make_track({Pose2()}, 0);
  EXPECT_THROW(score_sequence(a, c, 10, 10), EvaluationError);
}

TEST(Metrics, MidpointFailure) {
  SequenceResult r = make_sequence_result({0.5, 0.5, 0.0, 0.7});
  EXPECT_EQ(*r.failure_index, 2);
  EXPECT_DOUBLE_EQ(accuracy({r}), 0.5);
  EXPECT_DOUBLE_EQ(robustness({r}), 0.5);
  EXPECT_EQ(r.overlaps[3], 0.0);
}

TEST(Metrics, AllFailedAtStart) {
  std::vector<SequenceResult> rs{make_sequence_result({0.0, 0.9, 0.9}),
                                 make_sequence_result({0.0, 0.2, 0.5})};
  EXPECT_DOUBLE_EQ(robustness(rs), 0.0);
  EXPECT_DOUBLE_EQ(eao(rs, {1, 3}), 0.0);
}

TEST(Metrics, HandComputedFixture) {
  std::ifstream in(std::string(DFTRACK_FIXTURE_DIR) + "/metrics_two_sequences.json");
  ASSERT_TRUE(in.good());
  const auto j = nlohmann::json::parse(in);
  std::vector<SequenceResult> rs;
  for (const auto& s : j["sequences"]) {
    rs.push_back(make_sequence_result(s["overlaps"].get<std::vector<double>>(), s["id"].get<int>()));
  }
  const auto& ex = j["expected"];
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const auto& f = ex["failure_index"][i];
    if (f.is_null()) {
      EXPECT_FALSE(rs[i].failure_index.has_value());
    } else {
      EXPECT_EQ(rs[i].failure_index, f.get<int>());
    }
  }
  EXPECT_NEAR(accuracy(rs), ex["accuracy"].get<double>(), 1e-12);
  EXPECT_NEAR(robustness(rs), ex["robustness"].get<double>(), 1e-12);
  EaoInterval iv{ex["eao_interval"][0].get<int>(), ex["eao_interval"][1].get<int>()};
  EXPECT_NEAR(eao(rs, iv), ex["eao"].get<double>(), 1e-12);
  for (const auto& [ns, phi] : ex["phi"].items()) {
    const int n = std::stoi(ns);
    EXPECT_NEAR(eao(rs, {n, n}), phi.get<double>(), 1e-12) << n;
  }
}

TEST(Metrics, EaoSingleLengthIsMeanAverageOverlap) {
  Gen gen(306);
  std::vector<SequenceResult> rs;
  for (int s = 0; s < 5; ++s) {
    std::vector<double> o;
    for (int i = 0; i < 12; ++i) o.push_back(gen.uniform(0.0, 1.0));
    rs.push_back(make_sequence_result(o, s));
  }
  double mean = 0.0;
  for (const auto& r : rs) {
    double sum = 0.0;
    for (double v : r.overlaps) sum += v;
    mean += sum / 12.0;
  }
  EXPECT_NEAR(eao(rs, {12, 12}), mean / 5.0, 1e-12);
  EXPECT_THROW(eao(rs, {2, 13}), EvaluationError);
  EXPECT_THROW(eao(rs, {0, 4}), EvaluationError);
}

TEST(Metrics, DefaultEaoInterval) {
  EaoInterval iv = default_eao_interval(80);
  EXPECT_EQ(iv.lo, 20);
  EXPECT_EQ(iv.hi, 60);
  EXPECT_EQ(default_eao_interval(2).lo, 1);
}

TEST(Metrics, MonotoneUnderImprovement) {
  Gen gen(307);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> o;
    for (int i = 0; i < 15; ++i) o.push_back(gen.uniform(0.0, 1.0) < 0.1 ? 0.0 : gen.uniform(0.0, 1.0));
    std::vector<double> better = o;
    std::vector<double> better_pos = o;
    for (std::size_t i = 0; i < o.size(); ++i) {
      better[i] = std::min(1.0, o[i] + gen.uniform(0.0, 0.3) * (gen.uniform(0, 1) < 0.5));
      if (o[i] > 0.0) better_pos[i] = std::min(1.0, o[i] + gen.uniform(0.0, 0.3));
    }
    auto r0 = make_sequence_result(o), r1 = make_sequence_result(better),
         r2 = make_sequence_result(better_pos);
    EXPECT_GE(robustness({r1}), robustness({r0}));
    EXPECT_GE(eao({r1}, {1, 15}), eao({r0}, {1, 15}) - 1e-12);
    // With the failure frame unchanged accuracy cannot drop.
    EXPECT_GE(accuracy({r2}), accuracy({r0}) - 1e-12);
  }
}
