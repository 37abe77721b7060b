#include "dftrack/lie.hpp"

#include <cmath>
#include <numbers>

#include "dftrack/error.hpp"

namespace dft {
namespace {

constexpr double kSeriesThreshold = 1e-4;

// sin(t)/t and (1 - cos(t))/t, switching to a Taylor expansion near zero.
void v_coefficients(double t, double& a, double& b) {
  if (std::abs(t) < kSeriesThreshold) {
    const double t2 = t * t;
    a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    b = t / 2.0 - t * t2 / 24.0 + t * t2 * t2 / 720.0;
  } else {
    a = std::sin(t) / t;
    b = (1.0 - std::cos(t)) / t;
  }
}

// (t - sin t)/t^2 and (1 - cos t)/t^2.
void jacobian_coefficients(double t, double& c, double& d) {
  if (std::abs(t) < kSeriesThreshold) {
    const double t2 = t * t;
    c = t / 6.0 - t * t2 / 120.0 + t * t2 * t2 / 5040.0;
    d = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    c = (t - std::sin(t)) / (t * t);
    d = (1.0 - std::cos(t)) / (t * t);
  }
}

}  // namespace

double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(theta, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

Eigen::Matrix2d Pose2::rotation() const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Eigen::Matrix3d Pose2::matrix() const {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m.topLeftCorner<2, 2>() = rotation();
  m(0, 2) = x_;
  m(1, 2) = y_;
  return m;
}

Eigen::Vector2d Pose2::transform(const Eigen::Vector2d& p) const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  return {c * p.x() - s * p.y() + x_, s * p.x() + c * p.y() + y_};
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const Eigen::Vector2d t = a.transform(b.translation());
  return Pose2(t.x(), t.y(), a.theta() + b.theta());
}

Pose2 inverse(const Pose2& g) {
  const double c = std::cos(g.theta());
  const double s = std::sin(g.theta());
  return Pose2(-(c * g.x() + s * g.y()), -(-s * g.x() + c * g.y()), -g.theta());
}

Pose2 between(const Pose2& a, const Pose2& b) { return compose(inverse(a), b); }

Pose2 exp(const Tangent2& xi) {
  double a = 0.0;
  double b = 0.0;
  v_coefficients(xi.dtheta(), a, b);
  const double x = a * xi.dx() - b * xi.dy();
  const double y = b * xi.dx() + a * xi.dy();
  return Pose2(x, y, xi.dtheta());
}

Tangent2 log(const Pose2& g) {
  const double t = g.theta();
  double a = 0.0;
  double b = 0.0;
  v_coefficients(t, a, b);
  // V^-1 = [a b; -b a] / (a^2 + b^2)
  const double n = a * a + b * b;
  const double dx = (a * g.x() + b * g.y()) / n;
  const double dy = (-b * g.x() + a * g.y()) / n;
  return Tangent2(dx, dy, t);
}

Eigen::Matrix3d right_jacobian(const Tangent2& xi) {
  const double t = xi.dtheta();
  const double r1 = xi.dx();
  const double r2 = xi.dy();
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  v_coefficients(t, a, b);
  jacobian_coefficients(t, c, d);
  Eigen::Matrix3d j;
  j << a, b, r1 * c - r2 * d,
      -b, a, r1 * d + r2 * c,
      0.0, 0.0, 1.0;
  return j;
}

Eigen::Matrix3d left_jacobian(const Tangent2& xi) { return right_jacobian(Tangent2(-xi.v)); }

TangentCovariance::TangentCovariance(const Eigen::Matrix3d& q) : q_(q) {
  if (!q.allFinite()) throw ConfigError("tangent covariance has non-finite entries");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("tangent covariance is not symmetric");
  }
  Eigen::LLT<Eigen::Matrix3d> llt(q);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("tangent covariance is not positive-definite");
  }
  l_ = llt.matrixL();
  q_inv_ = llt.solve(Eigen::Matrix3d::Identity());
}

TangentCovariance TangentCovariance::from_sigmas(double sx, double sy, double stheta) {
  return TangentCovariance(Eigen::Vector3d(sx * sx, sy * sy, stheta * stheta).asDiagonal());
}

double TangentCovariance::mahalanobis_sq(const Tangent2& e) const {
  const Eigen::Vector3d w = l_.triangularView<Eigen::Lower>().solve(e.v);
  return w.squaredNorm();
}

}  // namespace dft
