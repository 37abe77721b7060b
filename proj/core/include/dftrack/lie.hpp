#pragma once

// SE(2) arithmetic. Tangent vectors are ordered (dx, dy, dtheta) and the
// exponential map is exp(xi) = [R(dtheta), V(dtheta) * (dx, dy)].

#include <Eigen/Core>
#include <Eigen/Cholesky>

namespace dft {

// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

struct Tangent2 {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();

  Tangent2() = default;
  explicit Tangent2(const Eigen::Vector3d& vec) : v(vec) {}
  Tangent2(double dx, double dy, double dtheta) : v(dx, dy, dtheta) {}

  double dx() const { return v.x(); }
  double dy() const { return v.y(); }
  double dtheta() const { return v.z(); }
};

class Pose2 {
 public:
  Pose2() = default;
  Pose2(double x, double y, double theta) : x_(x), y_(y), theta_(wrap_angle(theta)) {}

  static Pose2 identity() { return {}; }

  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }
  Eigen::Vector2d translation() const { return {x_, y_}; }
  Eigen::Matrix2d rotation() const;

  // 3x3 homogeneous matrix.
  Eigen::Matrix3d matrix() const;

  // Applies the rigid transform to a point: R p + t.
  Eigen::Vector2d transform(const Eigen::Vector2d& p) const;

  bool operator==(const Pose2&) const = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 inverse(const Pose2& g);
// inverse(a) * b
Pose2 between(const Pose2& a, const Pose2& b);

Pose2 exp(const Tangent2& xi);
Tangent2 log(const Pose2& g);

// Right-perturbation update g * exp(xi).
inline Pose2 retract(const Pose2& g, const Tangent2& xi) { return compose(g, exp(xi)); }

// Right Jacobian Jr(xi): exp(xi + d) ~= exp(xi) exp(Jr(xi) d).
Eigen::Matrix3d right_jacobian(const Tangent2& xi);
// Left Jacobian Jl(xi) = Jr(-xi): exp(xi + d) ~= exp(Jl(xi) d) exp(xi).
Eigen::Matrix3d left_jacobian(const Tangent2& xi);

// Symmetric positive-definite covariance over Tangent2 with its Cholesky
// factor cached. Construction throws ConfigError when the matrix is not
// symmetric (to 1e-12) or not positive-definite.
class TangentCovariance {
 public:
  explicit TangentCovariance(const Eigen::Matrix3d& q);

  static TangentCovariance identity() { return TangentCovariance(Eigen::Matrix3d::Identity()); }
  static TangentCovariance from_sigmas(double sx, double sy, double stheta);

  const Eigen::Matrix3d& matrix() const { return q_; }
  const Eigen::Matrix3d& lower_factor() const { return l_; }
  const Eigen::Matrix3d& inverse() const { return q_inv_; }

  // eQ^-1e through the Cholesky factor.
  double mahalanobis_sq(const Tangent2& e) const;

  // Draws xi ~ N(0, Q) given three standard-normal values.
  Tangent2 sample(const Eigen::Vector3d& standard_normal) const {
    return Tangent2(l_ * standard_normal);
  }

 private:
  Eigen::Matrix3d q_;
  Eigen::Matrix3d l_;
  Eigen::Matrix3d q_inv_;
};

inline double mahalanobis_sq(const Tangent2& e, const TangentCovariance& q) {
  return q.mahalanobis_sq(e);
}

}  // namespace dft
