#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "dftrack/dataset.hpp"
#include "dftrack/error.hpp"
#include "dftrack/hash.hpp"
#include "dftrack/metrics.hpp"
#include "dftrack/synth.hpp"
#include "scene_fixture.hpp"
#include "temp_dir.hpp"

using namespace dft;

namespace {

SceneConfig tiny(std::uint64_t seed = 3) {
  SceneConfig c = dtest::small_scene_config(seed);
  c.frame_width = 320;
  c.frame_height = 256;
  c.num_targets = 3;
  c.num_frames = 6;
  c.train_frames = 4;
  return c;
}

}  // namespace

TEST(Preset, Desk20) {
  SceneConfig c = benchmark_preset("desk20");
  EXPECT_EQ(c.num_targets, 20);
  EXPECT_EQ(c.num_frames, 180);
  EXPECT_EQ(c.train_frames, 100);
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(benchmark_preset("desk21"), ConfigError);
}

TEST(SceneConfig, InfeasibleConfigNamesConstraint) {
  SceneConfig c = tiny();
  c.frame_width = 100;
  try {
    make_scene(c);
    FAIL() << "expected GenerationError";
  } catch (const GenerationError& e) {
    EXPECT_NE(std::string(e.what()).find("do not fit"), std::string::npos) << e.what();
  }
  c = tiny();
  c.train_frames = 7;
  EXPECT_THROW(c.validate(), GenerationError);
  c = tiny();
  c.grating_contrast = 1.5;
  EXPECT_THROW(c.validate(), GenerationError);
}

TEST(Scene, ZeroTargetsIsPureBackground) {
  SceneConfig c = tiny();
  c.num_targets = 0;
  c.noise_sigma = 0.0;
  Scene s = make_scene(c);
  EXPECT_TRUE(s.tracks.empty());
  GrayImage bg = render_background(c);
  for (int k = 0; k < c.num_frames; ++k) {
    GrayImage f = render_frame(s, bg, k);
    for (std::size_t i = 0; i < f.data().size(); ++i) {
      ASSERT_EQ(f.data()[i], std::clamp(bg.data()[i], 0.0f, 1.0f));
    }
  }
  dtest::TempDir dir;
  write_scene(s, dir.path(), false);
  std::ifstream in(dir.path() / "tracks.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "track_id,frame,x,y,theta,width,height");
  EXPECT_FALSE(std::getline(in, line));
}

TEST(Scene, ZeroMotionKeepsPosesConstant) {
  SceneConfig c = tiny();
  c.motion_sigma_x = c.motion_sigma_y = c.motion_sigma_theta = 0.0;
  Scene s = make_scene(c);
  for (const auto& t : s.tracks) {
    ASSERT_EQ(t.size(), static_cast<std::size_t>(c.num_frames));
    for (const auto& e : t.entries) EXPECT_EQ(e.pose, t.entries.front().pose);
  }
}

TEST(Scene, BoxesStayInsideFrame) {
  SceneConfig c = benchmark_preset("desk20");
  Scene s = make_scene(c);
  ASSERT_EQ(s.tracks.size(), 20u);
  for (const auto& t : s.tracks) {
    ASSERT_EQ(t.size(), 180u);
    for (const auto& e : t.entries) {
      for (const auto& p : OrientedBox{e.pose, c.target_width, c.target_height}.corners()) {
        EXPECT_GE(p.x(), 0.0);
        EXPECT_GE(p.y(), 0.0);
        EXPECT_LE(p.x(), c.frame_width - 1.0);
        EXPECT_LE(p.y(), c.frame_height - 1.0);
      }
    }
  }
}

TEST(Scene, TargetsAreDistinct) {
  SceneConfig c = benchmark_preset("desk20");
  Scene s = make_scene(c);
  for (std::size_t i = 0; i < s.textures.size(); ++i) {
    for (std::size_t j = i + 1; j < s.textures.size(); ++j) {
      EXPECT_GT(texture_distance(s.textures[i], s.textures[j], c.target_width, c.target_height),
                0.05);
    }
  }
}

TEST(Scene, MotionFollowsConfiguredSigmas) {
  SceneConfig c = benchmark_preset("desk20");
  Scene s = make_scene(c);
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  int n = 0;
  for (const auto& t : s.tracks) {
    for (std::size_t k = 1; k < t.size(); ++k) {
      Eigen::Vector3d d = log(between(t.entries[k - 1].pose, t.entries[k].pose)).v;
      acc += d.cwiseProduct(d);
      ++n;
    }
  }
  Eigen::Vector3d sd = (acc / n).cwiseSqrt();
  // Border rejection trims the tails slightly.
  EXPECT_NEAR(sd.x(), 4.0, 0.3);
  EXPECT_NEAR(sd.y(), 4.0, 0.3);
  EXPECT_NEAR(sd.z(), 0.1, 0.008);
}

TEST(Scene, FramesStayInUnitRange) {
  SceneConfig c = tiny();
  Scene s = make_scene(c);
  GrayImage bg = render_background(c);
  GrayImage f = render_frame(s, bg, 2);
  for (float v : f.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Scene, TargetsChangeTheirFootprint) {
  SceneConfig c = tiny();
  c.noise_sigma = 0.0;
  Scene s = make_scene(c);
  GrayImage bg = render_background(c);
  GrayImage f = render_frame(s, bg, 0);
  const Pose2 g = s.tracks[0].entries[0].pose;
  const Eigen::Vector2d inside = g.transform({0.2 * c.target_width, 0.0});
  const int u = static_cast<int>(std::lround(inside.x())), v = static_cast<int>(std::lround(inside.y()));
  double diff = 0.0;
  for (int dv = -2; dv <= 2; ++dv)
    for (int du = -2; du <= 2; ++du) diff += std::abs(f.at(u + du, v + dv) - bg.at(u + du, v + dv));
  EXPECT_GT(diff, 0.1);
}

TEST(Scene, SameSeedIsByteIdentical) {
  dtest::TempDir a, b, c;
  write_scene(make_scene(tiny(5)), a.path(), false);
  write_scene(make_scene(tiny(5)), b.path(), false);
  write_scene(make_scene(tiny(6)), c.path(), false);
  EXPECT_EQ(sha256_tree(a.path()), sha256_tree(b.path()));
  EXPECT_NE(sha256_tree(a.path()), sha256_tree(c.path()));
}
