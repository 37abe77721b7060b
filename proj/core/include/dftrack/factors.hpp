#pragma once

// Factor-graph energy for a tracking chain. Every factor is a negative log
// likelihood over the variables it touches; pose gradients are taken with
// respect to right perturbations g * exp(xi).

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "dftrack/density.hpp"
#include "dftrack/encoder.hpp"
#include "dftrack/image.hpp"
#include "dftrack/lie.hpp"
#include "dftrack/warp.hpp"

namespace dft {

class PriorFactor {
 public:
  PriorFactor(Pose2 anchor, TangentCovariance q) : anchor_(anchor), q_(std::move(q)) {}

  const Pose2& anchor() const { return anchor_; }
  double energy(const Pose2& g) const;
  Tangent2 gradient(const Pose2& g) const;

 private:
  Pose2 anchor_;
  TangentCovariance q_;
};

// Brownian motion between consecutive poses: ||log(g1^-1 g2)||^2_Q.
class MotionFactor {
 public:
  explicit MotionFactor(TangentCovariance q) : q_(std::move(q)) {}

  const TangentCovariance& covariance() const { return q_; }
  double energy(const Pose2& g1, const Pose2& g2) const;
  // Gradients with respect to perturbations of g1 and g2, using the closed
  // form SE(2) Jacobians of log.
  std::pair<Tangent2, Tangent2> gradient(const Pose2& g1, const Pose2& g2) const;

 private:
  TangentCovariance q_;
};

// Gaussian random walk on appearance codes: a2 ~ N(a1, diag(variances)).
class AppearanceFactor {
 public:
  // Throws ConfigError if any variance is not positive.
  explicit AppearanceFactor(Eigen::VectorXd variances);

  int dim() const { return static_cast<int>(variances_.size()); }
  // 1/2 sum log(2 pi Qa_i)
  double constant() const { return constant_; }
  double energy(const Eigen::VectorXd& a1, const Eigen::VectorXd& a2) const;
  std::pair<Eigen::VectorXd, Eigen::VectorXd> gradient(const Eigen::VectorXd& a1,
                                                       const Eigen::VectorXd& a2) const;

 private:
  Eigen::VectorXd variances_;
  double constant_ = 0.0;
};

// phi(g; x) = nll_F(C(R(g, x)) - a) - nll_B(C(R(g, x))). The appearance
// offset a shifts the foreground mean and is absent in the default model.
class LikelihoodFactor {
 public:
  // Throws ContractError if the encoder/density/spec dimensions disagree.
  LikelihoodFactor(std::shared_ptr<const Encoder> encoder, GaussianDensity foreground,
                   GaussianDensity background, PatchSpec spec);

  // Returns a copy bound to a frame. The frame must outlive the factor.
  LikelihoodFactor bind(const GrayImage& frame) const;
  bool attached() const { return frame_ != nullptr; }

  const Encoder& encoder() const { return *encoder_; }
  const std::shared_ptr<const Encoder>& encoder_ptr() const { return encoder_; }
  const GaussianDensity& foreground() const { return fg_; }
  const GaussianDensity& background() const { return bg_; }
  const PatchSpec& spec() const { return spec_; }
  const GrayImage& frame() const;

  struct Evaluation {
    double energy = 0.0;
    double fg_nll = 0.0;
    double bg_nll = 0.0;
    Tangent2 pose_gradient;
    Eigen::VectorXd appearance_gradient;  // empty without appearance
  };

  double energy(const Pose2& g, const Eigen::VectorXd* appearance = nullptr) const;
  Evaluation evaluate(const Pose2& g, const Eigen::VectorXd* appearance = nullptr,
                      bool with_gradient = true) const;
  Tangent2 gradient(const Pose2& g, const Eigen::VectorXd* appearance = nullptr) const {
    return evaluate(g, appearance, true).pose_gradient;
  }
  // Energies of many poses through one batched encoding.
  Eigen::VectorXd energy_batch(const std::vector<Pose2>& poses) const;

 private:
  std::shared_ptr<const Encoder> encoder_;
  GaussianDensity fg_;
  GaussianDensity bg_;
  PatchSpec spec_;
  const GrayImage* frame_ = nullptr;
};

struct ChainGradient {
  std::vector<Tangent2> poses;
  std::vector<Eigen::VectorXd> appearances;  // empty entries where absent
};

// Markov-chain factor graph over per-frame states z_k = (g_k [, a_k]).
class ChainEnergy {
 public:
  // Returns the variable index.
  int add_state(const Pose2& g, std::optional<Eigen::VectorXd> appearance = std::nullopt);
  void add_prior(int var, PriorFactor f);
  void add_motion(int from, int to, MotionFactor f);
  void add_appearance(int from, int to, AppearanceFactor f);
  // The factor must be bound to a frame.
  void add_likelihood(int var, LikelihoodFactor f);

  int num_states() const { return static_cast<int>(poses_.size()); }
  int num_factors() const { return static_cast<int>(factors_.size()); }
  std::vector<Pose2>& poses() { return poses_; }
  const std::vector<Pose2>& poses() const { return poses_; }
  std::vector<std::optional<Eigen::VectorXd>>& appearances() { return appearances_; }
  const std::vector<std::optional<Eigen::VectorXd>>& appearances() const { return appearances_; }

  double energy() const;
  ChainGradient gradient() const;

  // Reverses factor storage order (energy must not change).
  void reverse_factor_order();

 private:
  struct Prior { int var; PriorFactor f; };
  struct Motion { int from; int to; MotionFactor f; };
  struct Appearance { int from; int to; AppearanceFactor f; };
  struct Likelihood { int var; LikelihoodFactor f; };
  using Factor = std::variant<Prior, Motion, Appearance, Likelihood>;

  void check_var(int var) const;
  const Eigen::VectorXd& appearance_of(int var) const;

  std::vector<Pose2> poses_;
  std::vector<std::optional<Eigen::VectorXd>> appearances_;
  std::vector<Factor> factors_;
};

}  // namespace dft
