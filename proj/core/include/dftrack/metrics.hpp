#pragma once

// Oriented-box overlap and the VOT-style tracking metrics. A sequence fails
// at its first frame with zero overlap; later frames count as zero overlap.

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dftrack/lie.hpp"
#include "dftrack/trajectory.hpp"

namespace dft {

struct OrientedBox {
  Pose2 pose;
  double width = 0.0;   // along the pose x-axis
  double height = 0.0;  // along the pose y-axis

  double area() const { return width * height; }
  // Counter-clockwise corners (in a y-up frame).
  std::array<Eigen::Vector2d, 4> corners() const;
  bool contains(const Eigen::Vector2d& p) const;
};

using Polygon = std::vector<Eigen::Vector2d>;

double polygon_area(const Polygon& poly);
// Sutherland-Hodgman clip of subject against a convex clip polygon (both
// counter-clockwise).
Polygon clip_convex(const Polygon& subject, const Polygon& clip);

double obb_intersection_area(const OrientedBox& a, const OrientedBox& b);
double obb_iou(const OrientedBox& a, const OrientedBox& b);

struct SequenceResult {
  int sequence_id = 0;
  std::vector<int> frames;
  std::vector<double> overlaps;
  std::optional<int> failure_index;  // index into overlaps, not a frame number

  std::size_t length() const { return overlaps.size(); }
  // Number of frames before failure (all frames if none).
  std::size_t successful_frames() const;
};

// Applies the failure rule to raw per-frame overlaps.
SequenceResult make_sequence_result(std::vector<double> overlaps, int sequence_id = 0,
                                    std::vector<int> frames = {});

// Throws EvaluationError if the frame indices differ.
SequenceResult score_sequence(const Trajectory& pred, const Trajectory& truth, double box_width,
                              double box_height);

double accuracy(const std::vector<SequenceResult>& results);
double robustness(const std::vector<SequenceResult>& results);

// Inclusive interval of sequence lengths.
struct EaoInterval {
  int lo = 1;
  int hi = 1;
};

// [L/4, 3L/4] with lo clamped to at least 1.
EaoInterval default_eao_interval(int length);

// Average of Phi(Ns) over Ns in [lo, hi], where Phi(Ns) is the mean over
// sequences of the average overlap on the first Ns frames. Throws
// EvaluationError if hi exceeds the shortest sequence or lo < 1.
double eao(const std::vector<SequenceResult>& results, EaoInterval interval);

}  // namespace dft
