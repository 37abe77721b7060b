#pragma once

// On-disk dataset layout:
//   frames/NNNNNN.pgm   6-digit zero-padded frame index from 000000
//   tracks.csv          track_id,frame,x,y,theta,width,height
//   dataset.json        frame size, counts, splits and box dims

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dftrack/image.hpp"
#include "dftrack/synth.hpp"
#include "dftrack/trajectory.hpp"

namespace dft {

// Half-open frame range [begin, end).
struct FrameRange {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
  bool contains(int k) const { return k >= begin && k < end; }
  bool operator==(const FrameRange&) const = default;
};

struct DatasetInfo {
  int frame_width = 0;
  int frame_height = 0;
  int num_frames = 0;
  FrameRange train_range;
  FrameRange test_range;
  double box_width = 0.0;
  double box_height = 0.0;

  bool operator==(const DatasetInfo&) const = default;
};

std::string frame_filename(int index);

// Writes/reads tracks.csv. Rows are sorted by (track_id, frame).
void write_tracks_csv(const std::filesystem::path& path, const std::vector<Trajectory>& tracks,
                      double box_width, double box_height);
// Throws IoError on malformed input, duplicate (track_id, frame) or
// non-increasing frames within a track.
std::vector<Trajectory> read_tracks_csv(const std::filesystem::path& path);

void write_dataset_info(const std::filesystem::path& path, const DatasetInfo& info);
DatasetInfo read_dataset_info(const std::filesystem::path& path);

class Dataset {
 public:
  // Validates dataset.json and tracks.csv against the frame files.
  explicit Dataset(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  const DatasetInfo& info() const { return info_; }
  const std::vector<Trajectory>& tracks() const { return tracks_; }
  const Trajectory& track(int track_id) const;

  std::filesystem::path frame_path(int index) const;
  GrayImage load_frame(int index) const;

  // Ground-truth poses of all tracks present in a frame.
  std::vector<Pose2> poses_in_frame(int index) const;
  // The part of a track within a frame range.
  Trajectory slice(const Trajectory& track, FrameRange range) const;

 private:
  std::filesystem::path root_;
  DatasetInfo info_;
  std::vector<Trajectory> tracks_;
  std::map<int, std::size_t> by_id_;
};

// Renders a scene into root. Refuses a non-empty directory unless force.
void write_scene(const Scene& scene, const std::filesystem::path& root, bool force);

}  // namespace dft
