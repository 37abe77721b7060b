#pragma once

// Tracking by optimisation: per frame, draw candidate poses from the
// Brownian motion model around the previous estimate, keep the one with the
// lowest energy E(g) = psi(g_prev, g) + phi(g; x), then refine it with
// backtracking steepest descent preconditioned by diag(Q).

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dftrack/factors.hpp"
#include "dftrack/image.hpp"
#include "dftrack/lie.hpp"
#include "dftrack/metrics.hpp"
#include "dftrack/trajectory.hpp"
#include "dftrack/warp.hpp"

namespace dft {

struct DescentConfig {
  int max_iters = 50;
  // Largest first trial step per tangent axis (px, px, rad).
  Eigen::Vector3d initial_step{2.0, 2.0, 0.05};
  double backtracking = 0.5;
  double armijo = 1e-4;
  double convergence_step_norm = 1e-3;
  int max_backtracks = 30;
};

struct TrackerConfig {
  int n_samples = 64;
  TangentCovariance q = TangentCovariance::from_sigmas(6.0, 6.0, 0.15);
  DescentConfig descent;
  double bg_overlap_max = 0.1;
  int bg_per_frame = 30;
  // Run a joint descent over the whole chain after the per-frame pass.
  bool whole_chain = false;
  int chain_iters = 20;

  // Throws ConfigError when a field is out of range.
  void validate() const;
};

// Deterministic per-(seed, track, frame) random stream.
std::mt19937_64 frame_rng(std::uint64_t seed, int track_id, int frame_index);

// Rejection-samples background poses: position uniform with the box fully
// inside the frame, angle uniform in (-pi, pi], IoU with every foreground box
// below config.bg_overlap_max. Throws SamplingError after
// 10^4 * bg_per_frame attempts.
std::vector<Pose2> bg_sample_poses(int frame_width, int frame_height,
                                   const std::vector<OrientedBox>& foreground,
                                   const PatchSpec& spec, const TrackerConfig& config,
                                   std::mt19937_64& rng);

struct FrameDiagnostics {
  int candidates = 0;
  double best_sample_energy = 0.0;
  double final_energy = 0.0;
  int descent_iterations = 0;
  int energy_evaluations = 0;
};

struct FrameResult {
  Pose2 pose;
  FrameDiagnostics diagnostics;
};

// Energy E(g) for one frame; likelihood must be bound to the frame.
double frame_energy(const Pose2& prev, const Pose2& g, const LikelihoodFactor& likelihood,
                    const MotionFactor& motion);

FrameResult track_frame(const Pose2& prev_pose, const LikelihoodFactor& likelihood,
                        const MotionFactor& motion, const TrackerConfig& config,
                        std::mt19937_64& rng);

// Descent alone, from a given start pose. Accepted iterates strictly decrease E.
FrameResult refine_pose(const Pose2& prev_pose, const Pose2& start, double start_energy,
                        const LikelihoodFactor& likelihood, const MotionFactor& motion,
                        const TrackerConfig& config);

// frames[i] holds frame number first_frame + i. frames[0] is initialised with
// init_pose. likelihood is the unbound factor shared across frames.
Trajectory track_sequence(std::span<const GrayImage* const> frames, int first_frame,
                          const Pose2& init_pose, const LikelihoodFactor& likelihood,
                          const TrackerConfig& config, std::uint64_t seed, int track_id = 0);

// Joint steepest descent over all poses of a chain whose first state is
// anchored by a prior; returns the number of accepted iterations.
int refine_chain(ChainEnergy& chain, const TrackerConfig& config, bool freeze_rotation);

}  // namespace dft
