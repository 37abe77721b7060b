#include "dftrack/warp.hpp"

#include <algorithm>
#include <cmath>

#include "dftrack/error.hpp"

namespace dft {

Eigen::Vector2d PatchSpec::local_point(int row, int col) const {
  const double px = -0.5 * box_width + (col + 0.5) * box_width / grid_cols;
  const double py = -0.5 * box_height + (row + 0.5) * box_height / grid_rows;
  return {px, py};
}

PatchSpec PatchSpec::axis_aligned() const {
  PatchSpec s = *this;
  const double side = std::max(box_width, box_height);
  const double pitch_x = box_width / grid_cols;
  const double pitch_y = box_height / grid_rows;
  s.box_width = side;
  s.box_height = side;
  s.grid_cols = std::max(1, static_cast<int>(std::lround(side / pitch_x)));
  s.grid_rows = std::max(1, static_cast<int>(std::lround(side / pitch_y)));
  s.oriented = false;
  return s;
}

Pose2 placement_pose(const Pose2& g, const PatchSpec& spec) {
  return spec.oriented ? g : Pose2(g.x(), g.y(), 0.0);
}

void extract_values(const Pose2& g, const GrayImage& img, const PatchSpec& spec,
                    Eigen::Ref<Eigen::VectorXd> out) {
  if (!spec.valid()) throw ContractError("invalid patch spec");
  const Pose2 p = placement_pose(g, spec);
  const double c = std::cos(p.theta());
  const double s = std::sin(p.theta());
  int i = 0;
  for (int r = 0; r < spec.grid_rows; ++r) {
    for (int col = 0; col < spec.grid_cols; ++col, ++i) {
      const Eigen::Vector2d pt = spec.local_point(r, col);
      const double u = c * pt.x() - s * pt.y() + p.x();
      const double v = s * pt.x() + c * pt.y() + p.y();
      out[i] = sample_bilinear(img, u, v).value;
    }
  }
}

Patch extract(const Pose2& g, const GrayImage& img, const PatchSpec& spec) {
  if (!spec.valid()) throw ContractError("invalid patch spec");
  const Pose2 p = placement_pose(g, spec);
  Patch patch;
  patch.values.resize(spec.dim());
  patch.coords.reserve(spec.dim());
  int i = 0;
  for (int r = 0; r < spec.grid_rows; ++r) {
    for (int col = 0; col < spec.grid_cols; ++col, ++i) {
      const Eigen::Vector2d uv = p.transform(spec.local_point(r, col));
      patch.coords.push_back(uv);
      patch.values[i] = sample_bilinear(img, uv.x(), uv.y()).value;
    }
  }
  return patch;
}

Tangent2 pullback_pose_gradient(const Patch& patch, const Eigen::VectorXd& de_dvalues,
                                const Pose2& g, const GrayImage& img, const PatchSpec& spec) {
  if (de_dvalues.size() != spec.dim() || static_cast<int>(patch.coords.size()) != spec.dim()) {
    throw ContractError("pullback dimensions do not match the patch spec");
  }
  // Sample i sits at w = t + R(p_i) for the oriented box, so under g * exp(xi)
  // dw/dxi = R [I | (-py, px)]. The non-oriented box keeps only the
  // translation block, still expressed in the body frame of g.
  double grad_u = 0.0;
  double grad_v = 0.0;
  double grad_rot = 0.0;
  const double c = std::cos(g.theta());
  const double s = std::sin(g.theta());
  int i = 0;
  for (int r = 0; r < spec.grid_rows; ++r) {
    for (int col = 0; col < spec.grid_cols; ++col, ++i) {
      const double w = de_dvalues[i];
      if (w == 0.0) continue;
      const Eigen::Vector2d& uv = patch.coords[i];
      const BilinearSample smp = sample_bilinear(img, uv.x(), uv.y());
      const double wu = w * smp.du;
      const double wv = w * smp.dv;
      grad_u += wu;
      grad_v += wv;
      if (spec.oriented) {
        const Eigen::Vector2d p = spec.local_point(r, col);
        grad_rot += wu * (-c * p.y() - s * p.x()) + wv * (-s * p.y() + c * p.x());
      }
    }
  }
  return Tangent2(c * grad_u + s * grad_v, -s * grad_u + c * grad_v, grad_rot);
}

}  // namespace dft
