#pragma once

// Differentiable oriented-patch extraction: a fixed grid laid over the box
// centred on a pose, bilinearly sampled from the frame, with the pullback
// from patch-space gradients to the pose tangent space.

#include <Eigen/Core>
#include <vector>

#include "dftrack/image.hpp"
#include "dftrack/lie.hpp"

namespace dft {

struct PatchSpec {
  double box_width = 70.0;   // extent along the pose x-axis, pixels
  double box_height = 40.0;  // extent along the pose y-axis, pixels
  int grid_cols = 35;
  int grid_rows = 20;
  // When false the box ignores the pose rotation (axis-aligned ablation).
  bool oriented = true;

  int dim() const { return grid_cols * grid_rows; }
  bool valid() const { return box_width > 0 && box_height > 0 && grid_cols > 0 && grid_rows > 0; }

  // Local box coordinates of grid sample (row, col), at cell centres.
  Eigen::Vector2d local_point(int row, int col) const;

  // Square, rotation-free variant with side max(box_width, box_height) and
  // the same sampling pitch.
  PatchSpec axis_aligned() const;

  bool operator==(const PatchSpec&) const = default;
};

// Pose actually used to place the box: the pose itself, or its translation
// only when the spec is not oriented.
Pose2 placement_pose(const Pose2& g, const PatchSpec& spec);

struct Patch {
  // Row-major raster, index = row * grid_cols + col.
  Eigen::VectorXd values;
  // Source image coordinates (u, v) of each sample.
  std::vector<Eigen::Vector2d> coords;
};

Patch extract(const Pose2& g, const GrayImage& img, const PatchSpec& spec);

// Patch values only, written into out (length spec.dim()).
void extract_values(const Pose2& g, const GrayImage& img, const PatchSpec& spec,
                    Eigen::Ref<Eigen::VectorXd> out);

// dE/dxi at xi = 0 for the perturbation g * exp(xi), given dE/dvalues for the
// patch extracted at g. The rotation component is zero for non-oriented specs.
Tangent2 pullback_pose_gradient(const Patch& patch, const Eigen::VectorXd& de_dvalues,
                                const Pose2& g, const GrayImage& img, const PatchSpec& spec);

}  // namespace dft
