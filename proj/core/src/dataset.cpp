#include "dftrack/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "dftrack/error.hpp"

namespace dft {

namespace fs = std::filesystem;

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d.pgm", index);
  return buf;
}

void write_tracks_csv(const fs::path& path, const std::vector<Trajectory>& tracks,
                      double box_width, double box_height) {
  std::vector<const Trajectory*> order;
  for (const auto& t : tracks) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(),
                   [](const Trajectory* a, const Trajectory* b) { return a->track_id < b->track_id; });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "track_id,frame,x,y,theta,width,height\n";
  char buf[256];
  for (const Trajectory* t : order) {
    for (const auto& e : t->entries) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", t->track_id, e.frame,
                    e.pose.x(), e.pose.y(), e.pose.theta(), box_width, box_height);
      out << buf;
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

template <typename T>
T parse_field(std::string_view s, const fs::path& path, int line, const char* name) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": bad " + name + " '" +
                  std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<Trajectory> read_tracks_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "track_id,frame,x,y,theta,width,height") {
    throw IoError(path.string() + ":1: unexpected header '" + line + "'");
  }
  std::map<int, Trajectory> by_id;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 7) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected 7 fields, got " +
                    std::to_string(f.size()));
    }
    const int id = parse_field<int>(f[0], path, lineno, "track_id");
    const int frame = parse_field<int>(f[1], path, lineno, "frame");
    const double x = parse_field<double>(f[2], path, lineno, "x");
    const double y = parse_field<double>(f[3], path, lineno, "y");
    const double th = parse_field<double>(f[4], path, lineno, "theta");
    Trajectory& t = by_id[id];
    t.track_id = id;
    if (!t.entries.empty() && frame <= t.entries.back().frame) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": track " + std::to_string(id) +
                    " frame " + std::to_string(frame) + " is duplicated or out of order");
    }
    TrajectoryEntry e;
    e.frame = frame;
    e.pose = Pose2(x, y, th);
    t.entries.push_back(e);
  }
  std::vector<Trajectory> out;
  for (auto& [id, t] : by_id) out.push_back(std::move(t));
  return out;
}

void write_dataset_info(const fs::path& path, const DatasetInfo& info) {
  nlohmann::ordered_json j;
  j["frame_width"] = info.frame_width;
  j["frame_height"] = info.frame_height;
  j["num_frames"] = info.num_frames;
  j["train_range"] = {info.train_range.begin, info.train_range.end};
  j["test_range"] = {info.test_range.begin, info.test_range.end};
  j["box_width"] = info.box_width;
  j["box_height"] = info.box_height;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

DatasetInfo read_dataset_info(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  DatasetInfo info;
  try {
    const auto j = nlohmann::json::parse(in);
    info.frame_width = j.at("frame_width").get<int>();
    info.frame_height = j.at("frame_height").get<int>();
    info.num_frames = j.at("num_frames").get<int>();
    const auto tr = j.at("train_range").get<std::vector<int>>();
    const auto te = j.at("test_range").get<std::vector<int>>();
    if (tr.size() != 2 || te.size() != 2) throw IoError("ranges must have two entries");
    info.train_range = {tr[0], tr[1]};
    info.test_range = {te[0], te[1]};
    info.box_width = j.at("box_width").get<double>();
    info.box_height = j.at("box_height").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  auto valid_range = [&](FrameRange r) {
    return r.begin >= 0 && r.begin <= r.end && r.end <= info.num_frames;
  };
  if (!valid_range(info.train_range) || !valid_range(info.test_range)) {
    throw IoError(path.string() + ": split range outside [0, num_frames]");
  }
  if (info.train_range.end > info.test_range.begin && info.test_range.end > info.train_range.begin &&
      info.train_range.size() > 0 && info.test_range.size() > 0) {
    throw IoError(path.string() + ": train and test ranges overlap");
  }
  if (info.frame_width <= 0 || info.frame_height <= 0 || info.box_width <= 0 ||
      info.box_height <= 0) {
    throw IoError(path.string() + ": frame and box dims must be positive");
  }
  return info;
}

Dataset::Dataset(fs::path root) : root_(std::move(root)) {
  info_ = read_dataset_info(root_ / "dataset.json");
  tracks_ = read_tracks_csv(root_ / "tracks.csv");
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    by_id_[tracks_[i].track_id] = i;
    for (const auto& e : tracks_[i].entries) {
      if (e.frame < 0 || e.frame >= info_.num_frames) {
        throw IoError("track " + std::to_string(tracks_[i].track_id) + " references frame " +
                      std::to_string(e.frame) + " outside the dataset");
      }
    }
  }
  for (int k = 0; k < info_.num_frames; ++k) {
    if (!fs::exists(frame_path(k))) throw IoError("missing frame file " + frame_path(k).string());
  }
}

const Trajectory& Dataset::track(int track_id) const {
  const auto it = by_id_.find(track_id);
  if (it == by_id_.end()) throw ConfigError("unknown track id " + std::to_string(track_id));
  return tracks_[it->second];
}

fs::path Dataset::frame_path(int index) const { return root_ / "frames" / frame_filename(index); }

GrayImage Dataset::load_frame(int index) const {
  if (index < 0 || index >= info_.num_frames) {
    throw IoError("frame " + std::to_string(index) + " out of range");
  }
  return read_pgm(frame_path(index));
}

std::vector<Pose2> Dataset::poses_in_frame(int index) const {
  std::vector<Pose2> out;
  for (const auto& t : tracks_) {
    for (const auto& e : t.entries) {
      if (e.frame == index) out.push_back(e.pose);
    }
  }
  return out;
}

Trajectory Dataset::slice(const Trajectory& track, FrameRange range) const {
  Trajectory out;
  out.track_id = track.track_id;
  for (const auto& e : track.entries) {
    if (range.contains(e.frame)) out.entries.push_back(e);
  }
  return out;
}

void write_scene(const Scene& scene, const fs::path& root, bool force) {
  if (fs::exists(root) && !fs::is_directory(root)) {
    throw IoError(root.string() + " exists and is not a directory");
  }
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!force) throw IoError(root.string() + " is not empty (use --force to overwrite)");
    fs::remove_all(root / "frames");
  }
  fs::create_directories(root / "frames");
  const SceneConfig& cfg = scene.config;
  const GrayImage bg = render_background(cfg);
  for (int k = 0; k < cfg.num_frames; ++k) {
    write_pgm(render_frame(scene, bg, k), root / "frames" / frame_filename(k));
  }
  write_tracks_csv(root / "tracks.csv", scene.tracks, cfg.target_width, cfg.target_height);
  DatasetInfo info;
  info.frame_width = cfg.frame_width;
  info.frame_height = cfg.frame_height;
  info.num_frames = cfg.num_frames;
  info.train_range = {0, cfg.train_frames};
  info.test_range = {cfg.train_frames, cfg.num_frames};
  info.box_width = cfg.target_width;
  info.box_height = cfg.target_height;
  write_dataset_info(root / "dataset.json", info);
}

}  // namespace dft
