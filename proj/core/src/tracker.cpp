#include "dftrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dftrack/error.hpp"

namespace dft {

void TrackerConfig::validate() const {
  if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
  if (!(bg_overlap_max >= 0.0 && bg_overlap_max < 1.0)) {
    throw ConfigError("bg_overlap_max must lie in [0, 1)");
  }
  if (bg_per_frame < 0) throw ConfigError("bg_per_frame must be non-negative");
  if (descent.max_iters < 0) throw ConfigError("descent max_iters must be non-negative");
  if (!(descent.backtracking > 0.0 && descent.backtracking < 1.0)) {
    throw ConfigError("descent backtracking factor must lie in (0, 1)");
  }
  if (!(descent.armijo >= 0.0 && descent.armijo < 1.0)) {
    throw ConfigError("descent armijo constant must lie in [0, 1)");
  }
  if ((descent.initial_step.array() <= 0.0).any()) {
    throw ConfigError("descent initial steps must be positive");
  }
  if (chain_iters < 0) throw ConfigError("chain_iters must be non-negative");
}

std::mt19937_64 frame_rng(std::uint64_t seed, int track_id, int frame_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(track_id),
                    static_cast<std::uint32_t>(frame_index)};
  return std::mt19937_64(seq);
}

std::vector<Pose2> bg_sample_poses(int frame_width, int frame_height,
                                   const std::vector<OrientedBox>& foreground,
                                   const PatchSpec& spec, const TrackerConfig& config,
                                   std::mt19937_64& rng) {
  std::vector<Pose2> out;
  if (config.bg_per_frame == 0) return out;
  std::uniform_real_distribution<double> ux(0.0, frame_width - 1.0);
  std::uniform_real_distribution<double> uy(0.0, frame_height - 1.0);
  std::uniform_real_distribution<double> ut(-std::numbers::pi, std::numbers::pi);
  const long max_attempts = 10000L * config.bg_per_frame;
  long attempts = 0;
  while (static_cast<int>(out.size()) < config.bg_per_frame) {
    if (attempts++ >= max_attempts) {
      throw SamplingError("background sampler found only " + std::to_string(out.size()) + " of " +
                          std::to_string(config.bg_per_frame) + " poses with IoU < " +
                          std::to_string(config.bg_overlap_max) + " after " +
                          std::to_string(max_attempts) + " attempts");
    }
    const double x = ux(rng);
    const double y = uy(rng);
    // (-pi, pi]: the open lower end maps onto +pi through wrap_angle.
    const Pose2 g(x, y, ut(rng));
    const OrientedBox box{placement_pose(g, spec), spec.box_width, spec.box_height};
    bool inside = true;
    for (const auto& c : box.corners()) {
      if (c.x() < 0.0 || c.y() < 0.0 || c.x() > frame_width - 1.0 || c.y() > frame_height - 1.0) {
        inside = false;
        break;
      }
    }
    if (!inside) continue;
    bool clear = true;
    for (const auto& fg : foreground) {
      if (obb_iou(box, fg) >= config.bg_overlap_max) {
        clear = false;
        break;
      }
    }
    if (clear) out.push_back(g);
  }
  return out;
}

double frame_energy(const Pose2& prev, const Pose2& g, const LikelihoodFactor& likelihood,
                    const MotionFactor& motion) {
  return motion.energy(prev, g) + likelihood.energy(g);
}

namespace {

Tangent2 frame_gradient(const Pose2& prev, const Pose2& g, const LikelihoodFactor& likelihood,
                        const MotionFactor& motion) {
  Tangent2 grad = likelihood.gradient(g);
  grad.v += motion.gradient(prev, g).second.v;
  return grad;
}

}  // namespace

FrameResult refine_pose(const Pose2& prev_pose, const Pose2& start, double start_energy,
                        const LikelihoodFactor& likelihood, const MotionFactor& motion,
                        const TrackerConfig& config) {
  const DescentConfig& dc = config.descent;
  const bool freeze_rotation = !likelihood.spec().oriented;
  const Eigen::Vector3d precond = config.q.matrix().diagonal();

  FrameResult result;
  result.pose = start;
  result.diagnostics.best_sample_energy = start_energy;
  double energy = start_energy;
  Pose2 g = start;

  for (int iter = 0; iter < dc.max_iters; ++iter) {
    Tangent2 grad = frame_gradient(prev_pose, g, likelihood, motion);
    if (freeze_rotation) grad.v.z() = 0.0;
    Eigen::Vector3d dir = -precond.cwiseProduct(grad.v);
    if (freeze_rotation) dir.z() = 0.0;
    const double slope = grad.v.dot(dir);
    if (!(slope < 0.0)) break;

    double alpha = 1.0;
    for (int k = 0; k < 3; ++k) {
      if (std::abs(dir[k]) > 0.0) alpha = std::min(alpha, dc.initial_step[k] / std::abs(dir[k]));
    }

    bool accepted = false;
    double step_norm = 0.0;
    for (int bt = 0; bt <= dc.max_backtracks; ++bt, alpha *= dc.backtracking) {
      const Eigen::Vector3d step = alpha * dir;
      const Pose2 trial = retract(g, Tangent2(step));
      const double e = frame_energy(prev_pose, trial, likelihood, motion);
      ++result.diagnostics.energy_evaluations;
      if (e < energy && e <= energy + dc.armijo * alpha * slope) {
        g = trial;
        energy = e;
        step_norm = step.norm();
        accepted = true;
        break;
      }
      if (step.norm() < 1e-12) break;
    }
    if (!accepted) break;
    ++result.diagnostics.descent_iterations;
    if (step_norm < dc.convergence_step_norm) break;
  }
  result.pose = g;
  result.diagnostics.final_energy = energy;
  return result;
}

FrameResult track_frame(const Pose2& prev_pose, const LikelihoodFactor& likelihood,
                        const MotionFactor& motion, const TrackerConfig& config,
                        std::mt19937_64& rng) {
  const bool freeze_rotation = !likelihood.spec().oriented;
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Pose2> candidates;
  candidates.reserve(static_cast<std::size_t>(config.n_samples) + 1);
  candidates.push_back(prev_pose);  // xi = 0
  for (int i = 0; i < config.n_samples; ++i) {
    Eigen::Vector3d z(normal(rng), normal(rng), normal(rng));
    Tangent2 xi = config.q.sample(z);
    if (freeze_rotation) xi.v.z() = 0.0;
    candidates.push_back(retract(prev_pose, xi));
  }

  const Eigen::VectorXd phi = likelihood.energy_batch(candidates);
  Eigen::Index best = 0;
  double best_energy = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const double e = motion.energy(prev_pose, candidates[static_cast<std::size_t>(i)]) + phi[i];
    if (e < best_energy) {
      best_energy = e;
      best = i;
    }
  }

  FrameResult result = refine_pose(prev_pose, candidates[static_cast<std::size_t>(best)],
                                   best_energy, likelihood, motion, config);
  result.diagnostics.candidates = static_cast<int>(candidates.size());
  result.diagnostics.energy_evaluations += static_cast<int>(candidates.size());
  return result;
}

int refine_chain(ChainEnergy& chain, const TrackerConfig& config, bool freeze_rotation) {
  const DescentConfig& dc = config.descent;
  const Eigen::Vector3d precond = config.q.matrix().diagonal();
  double energy = chain.energy();
  int accepted_iters = 0;
  auto& poses = chain.poses();
  for (int iter = 0; iter < config.chain_iters; ++iter) {
    const ChainGradient grad = chain.gradient();
    std::vector<Eigen::Vector3d> dirs(poses.size());
    double slope = 0.0;
    double alpha = 1.0;
    for (std::size_t i = 0; i < poses.size(); ++i) {
      Eigen::Vector3d g = grad.poses[i].v;
      if (freeze_rotation) g.z() = 0.0;
      dirs[i] = -precond.cwiseProduct(g);
      slope += g.dot(dirs[i]);
      for (int k = 0; k < 3; ++k) {
        if (std::abs(dirs[i][k]) > 0.0) {
          alpha = std::min(alpha, dc.initial_step[k] / std::abs(dirs[i][k]));
        }
      }
    }
    if (!(slope < 0.0)) break;

    const std::vector<Pose2> base = poses;
    bool accepted = false;
    double max_step = 0.0;
    for (int bt = 0; bt <= dc.max_backtracks; ++bt, alpha *= dc.backtracking) {
      max_step = 0.0;
      for (std::size_t i = 0; i < poses.size(); ++i) {
        const Eigen::Vector3d step = alpha * dirs[i];
        max_step = std::max(max_step, step.norm());
        poses[i] = retract(base[i], Tangent2(step));
      }
      const double e = chain.energy();
      if (e < energy && e <= energy + dc.armijo * alpha * slope) {
        energy = e;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      poses = base;
      break;
    }
    ++accepted_iters;
    if (max_step < dc.convergence_step_norm) break;
  }
  return accepted_iters;
}

Trajectory track_sequence(std::span<const GrayImage* const> frames, int first_frame,
                          const Pose2& init_pose, const LikelihoodFactor& likelihood,
                          const TrackerConfig& config, std::uint64_t seed, int track_id) {
  config.validate();
  Trajectory traj;
  traj.track_id = track_id;
  if (frames.empty()) return traj;

  const MotionFactor motion(config.q);
  Pose2 prev = init_pose;
  {
    TrajectoryEntry e;
    e.frame = first_frame;
    e.pose = init_pose;
    e.energy = likelihood.bind(*frames[0]).energy(init_pose);
    traj.append(e);
  }
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const int frame_index = first_frame + static_cast<int>(i);
    const LikelihoodFactor bound = likelihood.bind(*frames[i]);
    auto rng = frame_rng(seed, track_id, frame_index);
    const FrameResult r = track_frame(prev, bound, motion, config, rng);
    TrajectoryEntry e;
    e.frame = frame_index;
    e.pose = r.pose;
    e.energy = r.diagnostics.final_energy;
    e.candidates = r.diagnostics.candidates;
    e.descent_iterations = r.diagnostics.descent_iterations;
    traj.append(e);
    prev = r.pose;
  }

  if (config.whole_chain && frames.size() > 1) {
    ChainEnergy chain;
    for (const auto& e : traj.entries) chain.add_state(e.pose);
    // The initial state is pinned to the given box.
    chain.add_prior(0, PriorFactor(init_pose, TangentCovariance::from_sigmas(1e-3, 1e-3, 1e-5)));
    for (int k = 0; k < chain.num_states(); ++k) {
      if (k > 0) chain.add_motion(k - 1, k, motion);
      chain.add_likelihood(k, likelihood.bind(*frames[static_cast<std::size_t>(k)]));
    }
    refine_chain(chain, config, !likelihood.spec().oriented);
    for (std::size_t k = 0; k < traj.entries.size(); ++k) {
      traj.entries[k].pose = chain.poses()[k];
      traj.entries[k].energy = likelihood.bind(*frames[k]).energy(chain.poses()[k]);
    }
  }
  return traj;
}

}  // namespace dft
