#pragma once

#include <vector>

#include "dftrack/lie.hpp"

namespace dft {

struct TrajectoryEntry {
  int frame = 0;
  Pose2 pose;
  double energy = 0.0;
  int candidates = 0;
  int descent_iterations = 0;
};

// Ordered per-frame poses; frame indices strictly increasing.
struct Trajectory {
  int track_id = 0;
  std::vector<TrajectoryEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  // Throws ContractError if frame is not greater than the last frame.
  void append(TrajectoryEntry entry);
};

}  // namespace dft
