#pragma once

// Synthetic benchmark: honeycomb-like grating background, textured
// elliptical targets under Brownian SE(2) motion, exact ground truth.

#include <cstdint>
#include <string>
#include <vector>

#include "dftrack/image.hpp"
#include "dftrack/lie.hpp"
#include "dftrack/trajectory.hpp"

namespace dft {

struct SceneConfig {
  int frame_width = 1024;
  int frame_height = 1024;
  int num_targets = 20;
  // Unlabelled targets drawn from the same texture and motion models.
  int num_distractors = 0;
  // Body box: width along the target's heading, height across it.
  double target_width = 70.0;
  double target_height = 40.0;
  int num_frames = 180;
  int train_frames = 100;  // frames [0, train_frames) are the training split
  // Brownian motion standard deviations per frame (px, px, rad).
  double motion_sigma_x = 4.0;
  double motion_sigma_y = 4.0;
  double motion_sigma_theta = 0.1;
  double grating_period = 24.0;
  double grating_contrast = 0.3;
  double noise_sigma = 0.02;
  // Static per-cell brightness offsets, uniform in [-v, v], on a lattice with
  // the grating period, bilinearly blended.
  double cell_variation = 0.1;
  // Per-frame, per-target brightness offset standard deviation.
  double appearance_jitter = 0.0;
  // Minimum mean absolute difference between canonical target patches.
  double min_target_distinctness = 0.05;
  std::uint64_t seed = 1;

  // Throws GenerationError naming the violated constraint.
  void validate() const;
};

// "desk20"; throws ConfigError for unknown names.
SceneConfig benchmark_preset(const std::string& name);

// Per-target body texture parameters (all in body coordinates).
struct TargetTexture {
  double base = 0.5;         // mean body intensity
  double stripe_amp = 0.2;   // amplitude of bands across the body
  double stripe_freq = 3.0;  // bands per body length
  double stripe_phase = 0.0;
  double head = 0.3;         // signed brightness of the head spot at +x
  double spot_x = 0.0;       // extra spot position in [-1, 1] body units
  double spot_y = 0.0;
  double spot = 0.0;         // signed spot brightness
};

struct Scene {
  SceneConfig config;
  std::vector<TargetTexture> textures;
  // One trajectory per target, frames 0..num_frames-1.
  std::vector<Trajectory> tracks;
  std::vector<TargetTexture> distractor_textures;
  std::vector<Trajectory> distractor_tracks;
};

// Draws textures and trajectories. Frames are rendered on demand.
Scene make_scene(const SceneConfig& config);

// Static background without noise.
GrayImage render_background(const SceneConfig& config);

// Composites target t at pose g onto img (no noise, no clamping beyond [0, 1]).
void draw_target(GrayImage& img, const TargetTexture& tex, const Pose2& g, double width,
                 double height);

// Frame k: background, all targets at their frame-k poses, then noise drawn
// from a stream keyed on (seed, k).
GrayImage render_frame(const Scene& scene, const GrayImage& background, int frame);

// Mean absolute difference between two textures drawn at the identity pose
// on a flat 0.5 background, over the body box.
double texture_distance(const TargetTexture& a, const TargetTexture& b, double width,
                        double height);

}  // namespace dft
