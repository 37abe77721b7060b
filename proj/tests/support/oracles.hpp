#pragma once

// Reference computations that do not share code with the library.

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "dftrack/lie.hpp"
#include "dftrack/metrics.hpp"

namespace dtest {

using namespace dft;

// 3x3 homogeneous matrix exponential of the se(2) twist.
inline Eigen::Matrix3d twist_expm(const Eigen::Vector3d& xi) {
  Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
  t(0, 1) = -xi[2];
  t(1, 0) = xi[2];
  t(0, 2) = xi[0];
  t(1, 2) = xi[1];
  return t.exp();
}

inline Eigen::Matrix3d homogeneous(double x, double y, double theta) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = std::cos(theta);
  m(0, 1) = -std::sin(theta);
  m(1, 0) = std::sin(theta);
  m(1, 1) = std::cos(theta);
  m(0, 2) = x;
  m(1, 2) = y;
  return m;
}

// Central finite difference of f(g * exp(h e_i)) on each tangent axis.
inline Eigen::Vector3d fd_pose_gradient(const std::function<double(const Pose2&)>& f, const Pose2& g,
                                        double h_trans = 1e-3, double h_rot = 1e-4) {
  Eigen::Vector3d out;
  for (int i = 0; i < 3; ++i) {
    double h = i < 2 ? h_trans : h_rot;
    Eigen::Vector3d d = Eigen::Vector3d::Zero();
    d[i] = h;
    double fp = f(retract(g, Tangent2(d)));
    double fm = f(retract(g, Tangent2(-d)));
    out[i] = (fp - fm) / (2 * h);
  }
  return out;
}

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd out(x.size());
  Eigen::VectorXd y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y[i] = x[i] + h;
    double fp = f(y);
    y[i] = x[i] - h;
    double fm = f(y);
    y[i] = x[i];
    out[i] = (fp - fm) / (2 * h);
  }
  return out;
}

// max_i |a_i - b_i| / max(1, |b_i|)
inline double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    e = std::max(e, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  return e;
}

// Monte-Carlo IoU: intersection area from uniform points inside a.
inline double mc_iou(const OrientedBox& a, const OrientedBox& b, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double ca = std::cos(a.pose.theta()), sa = std::sin(a.pose.theta());
  double cb = std::cos(b.pose.theta()), sb = std::sin(b.pose.theta());
  long hits = 0;
  for (int i = 0; i < n; ++i) {
    double lx = u(rng) * a.width, ly = u(rng) * a.height;
    double px = a.pose.x() + ca * lx - sa * ly;
    double py = a.pose.y() + sa * lx + ca * ly;
    double dx = px - b.pose.x(), dy = py - b.pose.y();
    double bx = cb * dx + sb * dy, by = -sb * dx + cb * dy;
    hits += std::abs(bx) <= b.width / 2 && std::abs(by) <= b.height / 2;
  }
  double inter = a.area() * static_cast<double>(hits) / n;
  return inter / (a.area() + b.area() - inter);
}

}  // namespace dtest
