#include "dftrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dftrack/error.hpp"

namespace dft {

void Trajectory::append(TrajectoryEntry entry) {
  if (!entries.empty() && entry.frame <= entries.back().frame) {
    throw ContractError("trajectory frame indices must be strictly increasing");
  }
  entries.push_back(entry);
}

std::array<Eigen::Vector2d, 4> OrientedBox::corners() const {
  const double hw = 0.5 * width;
  const double hh = 0.5 * height;
  return {pose.transform({-hw, -hh}), pose.transform({hw, -hh}), pose.transform({hw, hh}),
          pose.transform({-hw, hh})};
}

bool OrientedBox::contains(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d local = inverse(pose).transform(p);
  return std::abs(local.x()) <= 0.5 * width && std::abs(local.y()) <= 0.5 * height;
}

double polygon_area(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

Polygon clip_convex(const Polygon& subject, const Polygon& clip) {
  Polygon out = subject;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Eigen::Vector2d a = clip[e];
    const Eigen::Vector2d b = clip[(e + 1) % m];
    const Eigen::Vector2d edge = b - a;
    // Inside is the left side of a->b for a counter-clockwise clip polygon.
    auto side = [&](const Eigen::Vector2d& p) {
      const Eigen::Vector2d r = p - a;
      return edge.x() * r.y() - edge.y() * r.x();
    };
    Polygon input = std::move(out);
    out.clear();
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d& cur = input[i];
      const Eigen::Vector2d& prev = input[(i + n - 1) % n];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) out.push_back(prev + (cur - prev) * (sp / (sp - sc)));
        out.push_back(cur);
      } else if (sp >= 0.0) {
        out.push_back(prev + (cur - prev) * (sp / (sp - sc)));
      }
    }
  }
  return out;
}

double obb_intersection_area(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const Polygon pa(ca.begin(), ca.end());
  const Polygon pb(cb.begin(), cb.end());
  return std::max(0.0, polygon_area(clip_convex(pa, pb)));
}

double obb_iou(const OrientedBox& a, const OrientedBox& b) {
  const double inter = obb_intersection_area(a, b);
  if (!(inter > 0.0)) return 0.0;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::size_t SequenceResult::successful_frames() const {
  return failure_index ? static_cast<std::size_t>(*failure_index) : overlaps.size();
}

SequenceResult make_sequence_result(std::vector<double> overlaps, int sequence_id,
                                    std::vector<int> frames) {
  SequenceResult r;
  r.sequence_id = sequence_id;
  for (std::size_t i = 0; i < overlaps.size(); ++i) {
    if (r.failure_index) {
      overlaps[i] = 0.0;
    } else if (overlaps[i] == 0.0) {
      r.failure_index = static_cast<int>(i);
    }
  }
  r.overlaps = std::move(overlaps);
  r.frames = std::move(frames);
  return r;
}

SequenceResult score_sequence(const Trajectory& pred, const Trajectory& truth, double box_width,
                              double box_height) {
  if (pred.size() != truth.size()) {
    throw EvaluationError("sequence " + std::to_string(truth.track_id) + ": predicted length " +
                          std::to_string(pred.size()) + " != truth length " +
                          std::to_string(truth.size()));
  }
  std::vector<double> overlaps;
  std::vector<int> frames;
  overlaps.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto& p = pred.entries[i];
    const auto& t = truth.entries[i];
    if (p.frame != t.frame) {
      throw EvaluationError("sequence " + std::to_string(truth.track_id) +
                            ": frame index mismatch at position " + std::to_string(i) + " (" +
                            std::to_string(p.frame) + " vs " + std::to_string(t.frame) + ")");
    }
    overlaps.push_back(obb_iou({p.pose, box_width, box_height}, {t.pose, box_width, box_height}));
    frames.push_back(t.frame);
  }
  return make_sequence_result(std::move(overlaps), truth.track_id, std::move(frames));
}

double accuracy(const std::vector<SequenceResult>& results) {
  if (results.empty()) throw EvaluationError("accuracy needs at least one sequence");
  double total = 0.0;
  for (const auto& r : results) {
    const std::size_t n = r.successful_frames();
    if (n == 0) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += r.overlaps[i];
    total += s / static_cast<double>(n);
  }
  return total / static_cast<double>(results.size());
}

double robustness(const std::vector<SequenceResult>& results) {
  if (results.empty()) throw EvaluationError("robustness needs at least one sequence");
  double total = 0.0;
  for (const auto& r : results) {
    if (r.length() == 0) continue;
    total += static_cast<double>(r.successful_frames()) / static_cast<double>(r.length());
  }
  return total / static_cast<double>(results.size());
}

EaoInterval default_eao_interval(int length) {
  return {std::max(1, length / 4), std::max(1, (3 * length) / 4)};
}

double eao(const std::vector<SequenceResult>& results, EaoInterval interval) {
  if (results.empty()) throw EvaluationError("EAO needs at least one sequence");
  if (interval.lo < 1 || interval.hi < interval.lo) {
    throw EvaluationError("invalid EAO interval [" + std::to_string(interval.lo) + ", " +
                          std::to_string(interval.hi) + "]");
  }
  std::size_t shortest = results.front().length();
  for (const auto& r : results) shortest = std::min(shortest, r.length());
  if (static_cast<std::size_t>(interval.hi) > shortest) {
    throw EvaluationError("EAO interval upper bound " + std::to_string(interval.hi) +
                          " exceeds sequence length " + std::to_string(shortest));
  }
  // Prefix sums give every Phi(Ns) in one pass per sequence.
  const int count = interval.hi - interval.lo + 1;
  std::vector<double> phi(static_cast<std::size_t>(count), 0.0);
  for (const auto& r : results) {
    double prefix = 0.0;
    for (int k = 0; k < interval.hi; ++k) {
      prefix += r.overlaps[static_cast<std::size_t>(k)];
      const int ns = k + 1;
      if (ns >= interval.lo) phi[static_cast<std::size_t>(ns - interval.lo)] += prefix / ns;
    }
  }
  double total = 0.0;
  for (double p : phi) total += p / static_cast<double>(results.size());
  return total / static_cast<double>(count);
}

}  // namespace dft
