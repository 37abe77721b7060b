#include "dftrack/factors.hpp"

#include <algorithm>
#include <Eigen/LU>
#include <cmath>
#include <numbers>

#include "dftrack/error.hpp"

namespace dft {

double PriorFactor::energy(const Pose2& g) const {
  return q_.mahalanobis_sq(log(between(anchor_, g)));
}

Tangent2 PriorFactor::gradient(const Pose2& g) const {
  const Tangent2 e = log(between(anchor_, g));
  const Eigen::Matrix3d jr_inv = right_jacobian(e).inverse();
  return Tangent2(2.0 * jr_inv.transpose() * (q_.inverse() * e.v));
}

double MotionFactor::energy(const Pose2& g1, const Pose2& g2) const {
  return q_.mahalanobis_sq(log(between(g1, g2)));
}

std::pair<Tangent2, Tangent2> MotionFactor::gradient(const Pose2& g1, const Pose2& g2) const {
  // e = log(g1^-1 g2). Perturbing g2 on the right: e -> e + Jr^-1(e) d.
  // Perturbing g1 on the right: g1^-1 -> exp(-d) g1^-1, e -> e - Jl^-1(e) d.
  const Tangent2 e = log(between(g1, g2));
  const Eigen::Vector3d w = 2.0 * (q_.inverse() * e.v);
  const Eigen::Matrix3d jr_inv = right_jacobian(e).inverse();
  const Eigen::Matrix3d jl_inv = left_jacobian(e).inverse();
  return {Tangent2(-(jl_inv.transpose() * w)), Tangent2(jr_inv.transpose() * w)};
}

AppearanceFactor::AppearanceFactor(Eigen::VectorXd variances) : variances_(std::move(variances)) {
  if ((variances_.array() <= 0.0).any()) throw ConfigError("appearance variances must be positive");
  constant_ = 0.5 * (variances_.array() * (2.0 * std::numbers::pi)).log().sum();
}

double AppearanceFactor::energy(const Eigen::VectorXd& a1, const Eigen::VectorXd& a2) const {
  if (a1.size() != dim() || a2.size() != dim()) throw ContractError("appearance length mismatch");
  return 0.5 * (a2 - a1).cwiseAbs2().cwiseQuotient(variances_).sum() + constant_;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> AppearanceFactor::gradient(
    const Eigen::VectorXd& a1, const Eigen::VectorXd& a2) const {
  if (a1.size() != dim() || a2.size() != dim()) throw ContractError("appearance length mismatch");
  const Eigen::VectorXd g = (a2 - a1).cwiseQuotient(variances_);
  return {-g, g};
}

LikelihoodFactor::LikelihoodFactor(std::shared_ptr<const Encoder> encoder,
                                   GaussianDensity foreground, GaussianDensity background,
                                   PatchSpec spec)
    : encoder_(std::move(encoder)),
      fg_(std::move(foreground)),
      bg_(std::move(background)),
      spec_(spec) {
  if (!encoder_) throw ContractError("likelihood factor needs an encoder");
  if (encoder_->dim() != fg_.dim() || encoder_->dim() != bg_.dim()) {
    throw ContractError("encoder dim does not match density dim");
  }
  if (encoder_->input_dim() != spec_.dim()) {
    throw ContractError("encoder input dim does not match the patch spec");
  }
}

LikelihoodFactor LikelihoodFactor::bind(const GrayImage& frame) const {
  LikelihoodFactor f = *this;
  f.frame_ = &frame;
  return f;
}

const GrayImage& LikelihoodFactor::frame() const {
  if (!frame_) throw ContractError("likelihood factor has no frame attached");
  return *frame_;
}

double LikelihoodFactor::energy(const Pose2& g, const Eigen::VectorXd* appearance) const {
  return evaluate(g, appearance, false).energy;
}

LikelihoodFactor::Evaluation LikelihoodFactor::evaluate(const Pose2& g,
                                                        const Eigen::VectorXd* appearance,
                                                        bool with_gradient) const {
  const GrayImage& img = frame();
  const Patch patch = extract(g, img, spec_);
  const Eigen::VectorXd c = encoder_->encode(patch.values);
  Evaluation out;
  Eigen::VectorXd c_fg = c;
  if (appearance) {
    if (appearance->size() != c.size()) throw ContractError("appearance length mismatch");
    c_fg -= *appearance;
  }
  out.fg_nll = fg_.nll(c_fg);
  out.bg_nll = bg_.nll(c);
  out.energy = out.fg_nll - out.bg_nll;
  if (!with_gradient) return out;

  const Eigen::VectorXd grad_fg = fg_.nll_grad(c_fg);
  const Eigen::VectorXd de_dc = grad_fg - bg_.nll_grad(c);
  const Eigen::VectorXd de_dx = encoder_->backprop(patch.values, de_dc);
  out.pose_gradient = pullback_pose_gradient(patch, de_dx, g, img, spec_);
  if (!spec_.oriented) out.pose_gradient.v.z() = 0.0;
  if (appearance) out.appearance_gradient = -grad_fg;
  return out;
}

Eigen::VectorXd LikelihoodFactor::energy_batch(const std::vector<Pose2>& poses) const {
  const GrayImage& img = frame();
  Eigen::MatrixXd x(spec_.dim(), static_cast<Eigen::Index>(poses.size()));
  for (std::size_t i = 0; i < poses.size(); ++i) {
    extract_values(poses[i], img, spec_, x.col(static_cast<Eigen::Index>(i)));
  }
  const Eigen::MatrixXd c = encoder_->encode_batch(x);
  return fg_.nll_batch(c) - bg_.nll_batch(c);
}

int ChainEnergy::add_state(const Pose2& g, std::optional<Eigen::VectorXd> appearance) {
  poses_.push_back(g);
  appearances_.push_back(std::move(appearance));
  return static_cast<int>(poses_.size()) - 1;
}

void ChainEnergy::check_var(int var) const {
  if (var < 0 || var >= num_states()) throw ContractError("factor references unknown variable");
}

const Eigen::VectorXd& ChainEnergy::appearance_of(int var) const {
  const auto& a = appearances_[static_cast<std::size_t>(var)];
  if (!a) throw ContractError("appearance factor references a pose-only state");
  return *a;
}

void ChainEnergy::add_prior(int var, PriorFactor f) {
  check_var(var);
  factors_.emplace_back(Prior{var, std::move(f)});
}

void ChainEnergy::add_motion(int from, int to, MotionFactor f) {
  check_var(from);
  check_var(to);
  factors_.emplace_back(Motion{from, to, std::move(f)});
}

void ChainEnergy::add_appearance(int from, int to, AppearanceFactor f) {
  check_var(from);
  check_var(to);
  if (appearance_of(from).size() != f.dim() || appearance_of(to).size() != f.dim()) {
    throw ContractError("appearance factor arity does not match state");
  }
  factors_.emplace_back(Appearance{from, to, std::move(f)});
}

void ChainEnergy::add_likelihood(int var, LikelihoodFactor f) {
  check_var(var);
  if (!f.attached()) throw ContractError("likelihood factor must be bound to a frame");
  factors_.emplace_back(Likelihood{var, std::move(f)});
}

double ChainEnergy::energy() const {
  double total = 0.0;
  for (const auto& factor : factors_) {
    total += std::visit(
        [&](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Prior>) {
            return f.f.energy(poses_[f.var]);
          } else if constexpr (std::is_same_v<T, Motion>) {
            return f.f.energy(poses_[f.from], poses_[f.to]);
          } else if constexpr (std::is_same_v<T, Appearance>) {
            return f.f.energy(appearance_of(f.from), appearance_of(f.to));
          } else {
            const auto& a = appearances_[f.var];
            return f.f.energy(poses_[f.var], a ? &*a : nullptr);
          }
        },
        factor);
  }
  return total;
}

ChainGradient ChainEnergy::gradient() const {
  ChainGradient g;
  g.poses.assign(poses_.size(), Tangent2());
  g.appearances.resize(poses_.size());
  for (std::size_t i = 0; i < poses_.size(); ++i) {
    if (appearances_[i]) g.appearances[i] = Eigen::VectorXd::Zero(appearances_[i]->size());
  }
  for (const auto& factor : factors_) {
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Prior>) {
            g.poses[f.var].v += f.f.gradient(poses_[f.var]).v;
          } else if constexpr (std::is_same_v<T, Motion>) {
            const auto [d1, d2] = f.f.gradient(poses_[f.from], poses_[f.to]);
            g.poses[f.from].v += d1.v;
            g.poses[f.to].v += d2.v;
          } else if constexpr (std::is_same_v<T, Appearance>) {
            const auto [d1, d2] = f.f.gradient(appearance_of(f.from), appearance_of(f.to));
            g.appearances[f.from] += d1;
            g.appearances[f.to] += d2;
          } else {
            const auto& a = appearances_[f.var];
            const auto ev = f.f.evaluate(poses_[f.var], a ? &*a : nullptr, true);
            g.poses[f.var].v += ev.pose_gradient.v;
            if (a) g.appearances[f.var] += ev.appearance_gradient;
          }
        },
        factor);
  }
  return g;
}

void ChainEnergy::reverse_factor_order() { std::reverse(factors_.begin(), factors_.end()); }

}  // namespace dft
