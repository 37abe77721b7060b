#include "dftrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dftrack/error.hpp"
#include "dftrack/metrics.hpp"

namespace dft {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t tag, std::uint32_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), tag, index};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kTagTexture = 0x74657874;
constexpr std::uint32_t kTagMotion = 0x6d6f7465;
constexpr std::uint32_t kTagNoise = 0x6e6f6973;
constexpr std::uint32_t kTagCells = 0x63656c6c;
constexpr std::uint32_t kTagJitter = 0x6a697474;

bool box_inside(const Pose2& g, double w, double h, int fw, int fh) {
  const OrientedBox box{g, w, h};
  for (const auto& c : box.corners()) {
    if (c.x() < 0.0 || c.y() < 0.0 || c.x() > fw - 1.0 || c.y() > fh - 1.0) return false;
  }
  return true;
}

TargetTexture draw_texture(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  TargetTexture t;
  t.base = 0.15 + 0.7 * u01(rng);
  t.stripe_amp = 0.1 + 0.15 * u01(rng);
  t.stripe_freq = 1.5 + 2.5 * u01(rng);
  t.stripe_phase = kTwoPi * u01(rng);
  const double head = 0.2 + 0.15 * u01(rng);
  t.head = t.base > 0.5 ? -head : head;
  t.spot_x = 2.0 * u01(rng) - 1.0;
  t.spot_y = 2.0 * u01(rng) - 1.0;
  t.spot = 0.6 * u01(rng) - 0.3;
  return t;
}

double texture_value(const TargetTexture& t, double lx, double ly, double w, double h) {
  const double a = 0.5 * w;
  const double b = 0.5 * h;
  double v = t.base + t.stripe_amp * std::cos(kTwoPi * t.stripe_freq * lx / w + t.stripe_phase);
  const double hs = 0.2 * a;
  const double hx = lx - 0.6 * a;
  v += t.head * std::exp(-(hx * hx + ly * ly) / (2.0 * hs * hs));
  const double sx = lx - 0.5 * a * t.spot_x;
  const double sy = ly - 0.5 * b * t.spot_y;
  const double ss = 0.25 * b;
  v += t.spot * std::exp(-(sx * sx + sy * sy) / (2.0 * ss * ss));
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

void SceneConfig::validate() const {
  if (frame_width <= 0 || frame_height <= 0) throw GenerationError("frame size must be positive");
  if (num_targets < 0) throw GenerationError("target count must be non-negative");
  if (num_distractors < 0) throw GenerationError("distractor count must be non-negative");
  if (!(target_width > 0.0 && target_height > 0.0)) {
    throw GenerationError("target dims must be positive");
  }
  if (num_frames < 1) throw GenerationError("frame count must be at least 1");
  if (train_frames < 0 || train_frames > num_frames) {
    throw GenerationError("train split must lie within the frame count");
  }
  if (motion_sigma_x < 0.0 || motion_sigma_y < 0.0 || motion_sigma_theta < 0.0) {
    throw GenerationError("motion sigmas must be non-negative");
  }
  if (!(grating_period > 0.0)) throw GenerationError("grating period must be positive");
  if (grating_contrast < 0.0 || grating_contrast > 1.0) {
    throw GenerationError("grating contrast must lie in [0, 1]");
  }
  if (noise_sigma < 0.0) throw GenerationError("noise sigma must be non-negative");
  if (cell_variation < 0.0) throw GenerationError("cell variation must be non-negative");
  if (appearance_jitter < 0.0) throw GenerationError("appearance jitter must be non-negative");
  const double diag = std::hypot(target_width, target_height);
  if (num_targets + num_distractors > 0 && (frame_width <= 2.0 * diag || frame_height <= 2.0 * diag)) {
    throw GenerationError("targets do not fit: frame " + std::to_string(frame_width) + "x" +
                          std::to_string(frame_height) + " needs to exceed twice the box diagonal " +
                          std::to_string(diag) + " on each side");
  }
}

SceneConfig benchmark_preset(const std::string& name) {
  if (name == "desk20") return SceneConfig{};
  throw ConfigError("unknown preset '" + name + "' (known: desk20)");
}

GrayImage render_background(const SceneConfig& config) {
  GrayImage img(config.frame_width, config.frame_height, 0.5f);
  const double k = kTwoPi / config.grating_period;
  const double dirs[3][2] = {{1.0, 0.0},
                             {std::cos(kTwoPi / 3.0), std::sin(kTwoPi / 3.0)},
                             {std::cos(2.0 * kTwoPi / 3.0), std::sin(2.0 * kTwoPi / 3.0)}};
  const double p = config.grating_period;
  const int gw = static_cast<int>(std::ceil(config.frame_width / p)) + 2;
  const int gh = static_cast<int>(std::ceil(config.frame_height / p)) + 2;
  std::vector<double> cells(static_cast<std::size_t>(gw) * gh, 0.0);
  if (config.cell_variation > 0.0) {
    auto rng = stream(config.seed, kTagCells);
    std::uniform_real_distribution<double> u(-config.cell_variation, config.cell_variation);
    for (double& c : cells) c = u(rng);
  }
  for (int y = 0; y < config.frame_height; ++y) {
    for (int x = 0; x < config.frame_width; ++x) {
      double s = 0.0;
      for (const auto& d : dirs) s += std::cos(k * (d[0] * x + d[1] * y));
      // s lies in [-1.5, 3].
      const double unit = (s + 1.5) / 4.5;
      double v = 0.5 + config.grating_contrast * (unit - 0.5);
      if (config.cell_variation > 0.0) {
        const double gx = x / p;
        const double gy = y / p;
        const int ix = static_cast<int>(gx);
        const int iy = static_cast<int>(gy);
        const double fx = gx - ix;
        const double fy = gy - iy;
        auto at = [&](int i, int j) { return cells[static_cast<std::size_t>(j) * gw + i]; };
        v += (1 - fy) * ((1 - fx) * at(ix, iy) + fx * at(ix + 1, iy)) +
             fy * ((1 - fx) * at(ix, iy + 1) + fx * at(ix + 1, iy + 1));
      }
      img.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return img;
}

void draw_target(GrayImage& img, const TargetTexture& tex, const Pose2& g, double width,
                 double height) {
  const double a = 0.5 * width;
  const double b = 0.5 * height;
  const double reach = std::hypot(a, b) + 2.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(g.x() - reach)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(g.x() + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(g.y() - reach)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(g.y() + reach)));
  const double c = std::cos(g.theta());
  const double s = std::sin(g.theta());
  const double soft = 1.5;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - g.x();
      const double dy = y - g.y();
      const double lx = c * dx + s * dy;
      const double ly = -s * dx + c * dy;
      const double r = std::hypot(lx / a, ly / b);
      const double alpha = std::clamp((1.0 - r) * b / soft + 0.5, 0.0, 1.0);
      if (alpha <= 0.0) continue;
      const double v = texture_value(tex, lx, ly, width, height);
      float& px = img.at(x, y);
      px = static_cast<float>((1.0 - alpha) * px + alpha * v);
    }
  }
}

double texture_distance(const TargetTexture& a, const TargetTexture& b, double width,
                        double height) {
  const int w = static_cast<int>(std::ceil(width)) + 4;
  const int h = static_cast<int>(std::ceil(height)) + 4;
  GrayImage ia(w, h, 0.5f);
  GrayImage ib(w, h, 0.5f);
  const Pose2 centre(0.5 * (w - 1), 0.5 * (h - 1), 0.0);
  draw_target(ia, a, centre, width, height);
  draw_target(ib, b, centre, width, height);
  double sum = 0.0;
  for (std::size_t i = 0; i < ia.data().size(); ++i) {
    sum += std::abs(static_cast<double>(ia.data()[i]) - ib.data()[i]);
  }
  return sum / static_cast<double>(ia.data().size());
}

namespace {

// Textures distinct from every entry of `against` by more than the threshold.
void draw_distinct_textures(int count, const SceneConfig& config, std::mt19937_64& rng,
                            std::vector<TargetTexture>& against, std::vector<TargetTexture>& out,
                            const char* what) {
  for (int t = 0; t < count; ++t) {
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      const TargetTexture cand = draw_texture(rng);
      ok = true;
      for (const auto& other : against) {
        if (texture_distance(cand, other, config.target_width, config.target_height) <=
            config.min_target_distinctness) {
          ok = false;
          break;
        }
      }
      if (ok) out.push_back(cand);
    }
    if (!ok) {
      throw GenerationError("could not draw " + std::to_string(count) + " " + what +
                            " textures at mean absolute difference > " +
                            std::to_string(config.min_target_distinctness));
    }
  }
}

Trajectory brownian_track(int id, Pose2 g, const SceneConfig& config, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Trajectory tr;
  tr.track_id = id;
  tr.append({0, g, 0.0, 0, 0});
  for (int k = 1; k < config.num_frames; ++k) {
    Pose2 next = g;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Tangent2 xi(config.motion_sigma_x * normal(rng), config.motion_sigma_y * normal(rng),
                        config.motion_sigma_theta * normal(rng));
      const Pose2 cand = retract(g, xi);
      if (box_inside(cand, config.target_width, config.target_height, config.frame_width,
                     config.frame_height)) {
        next = cand;
        break;
      }
    }
    g = next;
    tr.append({k, g, 0.0, 0, 0});
  }
  return tr;
}

}  // namespace

Scene make_scene(const SceneConfig& config) {
  config.validate();
  Scene scene;
  scene.config = config;

  auto tex_rng = stream(config.seed, kTagTexture);
  draw_distinct_textures(config.num_targets, config, tex_rng, scene.textures, scene.textures,
                         "mutually distinct target");
  // Distractors only need to differ from the labelled targets.
  draw_distinct_textures(config.num_distractors, config, tex_rng, scene.textures,
                         scene.distractor_textures, "distractor");

  auto rng = stream(config.seed, kTagMotion);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double diag = std::hypot(config.target_width, config.target_height);
  const int total = config.num_targets + config.num_distractors;
  std::vector<Pose2> initial;
  for (int t = 0; t < total; ++t) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      const double x = diag + u01(rng) * (config.frame_width - 1.0 - 2.0 * diag);
      const double y = diag + u01(rng) * (config.frame_height - 1.0 - 2.0 * diag);
      const double th = std::numbers::pi - kTwoPi * u01(rng);
      const Pose2 g(x, y, th);
      placed = true;
      for (const auto& o : initial) {
        if (std::hypot(o.x() - x, o.y() - y) < diag) {
          placed = false;
          break;
        }
      }
      if (placed) initial.push_back(g);
    }
    if (!placed) {
      throw GenerationError("could not place " + std::to_string(total) +
                            " targets at least one box diagonal apart");
    }
  }

  for (int t = 0; t < total; ++t) {
    Trajectory tr = brownian_track(t, initial[static_cast<std::size_t>(t)], config, rng);
    if (t < config.num_targets) {
      scene.tracks.push_back(std::move(tr));
    } else {
      scene.distractor_tracks.push_back(std::move(tr));
    }
  }
  return scene;
}

GrayImage render_frame(const Scene& scene, const GrayImage& background, int frame) {
  const SceneConfig& cfg = scene.config;
  if (frame < 0 || frame >= cfg.num_frames) {
    throw ContractError("frame " + std::to_string(frame) + " out of range");
  }
  GrayImage img = background;
  auto jitter_rng = stream(cfg.seed, kTagJitter, static_cast<std::uint32_t>(frame));
  std::normal_distribution<double> jitter(0.0, 1.0);
  auto draw_all = [&](const std::vector<TargetTexture>& textures,
                      const std::vector<Trajectory>& tracks) {
    for (std::size_t t = 0; t < tracks.size(); ++t) {
      TargetTexture tex = textures[t];
      tex.base += cfg.appearance_jitter * jitter(jitter_rng);
      draw_target(img, tex, tracks[t].entries[static_cast<std::size_t>(frame)].pose,
                  cfg.target_width, cfg.target_height);
    }
  };
  // Labelled targets are drawn last, on top.
  draw_all(scene.distractor_textures, scene.distractor_tracks);
  draw_all(scene.textures, scene.tracks);
  if (cfg.noise_sigma > 0.0) {
    auto rng = stream(cfg.seed, kTagNoise, static_cast<std::uint32_t>(frame));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (float& px : img.data()) {
      px = static_cast<float>(std::clamp(px + cfg.noise_sigma * normal(rng), 0.0, 1.0));
    }
  }
  return img;
}

}  // namespace dft
