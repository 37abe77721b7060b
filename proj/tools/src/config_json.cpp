#include "config_json.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "dftrack/error.hpp"
#include "dftrack/hash.hpp"

namespace dft::cli {

namespace {

void check_keys(const Json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError(std::string("unknown ") + what + " config key '" + k + "'");
  }
}

template <typename T>
void get(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Json to_json(const SceneConfig& c) {
  Json j;
  j["frame_width"] = c.frame_width;
  j["frame_height"] = c.frame_height;
  j["num_targets"] = c.num_targets;
  j["num_distractors"] = c.num_distractors;
  j["target_width"] = c.target_width;
  j["target_height"] = c.target_height;
  j["num_frames"] = c.num_frames;
  j["train_frames"] = c.train_frames;
  j["motion_sigma_x"] = c.motion_sigma_x;
  j["motion_sigma_y"] = c.motion_sigma_y;
  j["motion_sigma_theta"] = c.motion_sigma_theta;
  j["grating_period"] = c.grating_period;
  j["grating_contrast"] = c.grating_contrast;
  j["noise_sigma"] = c.noise_sigma;
  j["cell_variation"] = c.cell_variation;
  j["appearance_jitter"] = c.appearance_jitter;
  j["min_target_distinctness"] = c.min_target_distinctness;
  j["seed"] = c.seed;
  return j;
}

void apply_json(const Json& j, SceneConfig& c) {
  check_keys(j,
             {"preset", "frame_width", "frame_height", "num_targets", "num_distractors", "target_width",
              "target_height", "num_frames", "train_frames", "motion_sigma_x", "motion_sigma_y",
              "motion_sigma_theta", "grating_period", "grating_contrast", "noise_sigma",
              "cell_variation", "appearance_jitter", "min_target_distinctness", "seed"},
             "scene");
  if (j.contains("preset")) c = benchmark_preset(j.at("preset").get<std::string>());
  get(j, "frame_width", c.frame_width);
  get(j, "frame_height", c.frame_height);
  get(j, "num_targets", c.num_targets);
  get(j, "num_distractors", c.num_distractors);
  get(j, "target_width", c.target_width);
  get(j, "target_height", c.target_height);
  get(j, "num_frames", c.num_frames);
  get(j, "train_frames", c.train_frames);
  get(j, "motion_sigma_x", c.motion_sigma_x);
  get(j, "motion_sigma_y", c.motion_sigma_y);
  get(j, "motion_sigma_theta", c.motion_sigma_theta);
  get(j, "grating_period", c.grating_period);
  get(j, "grating_contrast", c.grating_contrast);
  get(j, "noise_sigma", c.noise_sigma);
  get(j, "cell_variation", c.cell_variation);
  get(j, "appearance_jitter", c.appearance_jitter);
  get(j, "min_target_distinctness", c.min_target_distinctness);
  get(j, "seed", c.seed);
}

Json to_json(const TrainConfig& c) {
  Json j;
  j["encoder"] = encoder_kind_name(c.encoder);
  j["dim"] = c.dim;
  j["seed"] = c.seed;
  j["box_width"] = c.spec.box_width;
  j["box_height"] = c.spec.box_height;
  j["grid_cols"] = c.spec.grid_cols;
  j["grid_rows"] = c.spec.grid_rows;
  j["oriented"] = c.spec.oriented;
  j["fg_covariance"] = covariance_kind_name(c.fg_covariance);
  j["bg_covariance"] = covariance_kind_name(c.bg_covariance);
  j["bg_per_frame"] = c.bg_per_frame;
  j["bg_overlap_max"] = c.bg_overlap_max;
  j["rae_hidden"] = c.rae.hidden;
  j["rae_lambda"] = c.rae.lambda;
  j["rae_epochs"] = c.rae.epochs;
  j["rae_batch_size"] = c.rae.batch_size;
  j["rae_learning_rate"] = c.rae.learning_rate;
  j["rae_center_input"] = c.rae.center_input;
  return j;
}

void apply_json(const Json& j, TrainConfig& c) {
  check_keys(j,
             {"encoder", "dim", "seed", "box_width", "box_height", "grid_cols", "grid_rows",
              "oriented", "fg_covariance", "bg_covariance", "bg_per_frame", "bg_overlap_max",
              "rae_hidden", "rae_lambda", "rae_epochs", "rae_batch_size", "rae_learning_rate",
              "rae_center_input"},
             "train");
  if (j.contains("encoder")) c.encoder = parse_encoder_kind(j.at("encoder").get<std::string>());
  get(j, "dim", c.dim);
  get(j, "seed", c.seed);
  get(j, "box_width", c.spec.box_width);
  get(j, "box_height", c.spec.box_height);
  get(j, "grid_cols", c.spec.grid_cols);
  get(j, "grid_rows", c.spec.grid_rows);
  get(j, "oriented", c.spec.oriented);
  if (j.contains("fg_covariance")) {
    c.fg_covariance = parse_covariance_kind(j.at("fg_covariance").get<std::string>());
  }
  if (j.contains("bg_covariance")) {
    c.bg_covariance = parse_covariance_kind(j.at("bg_covariance").get<std::string>());
  }
  get(j, "bg_per_frame", c.bg_per_frame);
  get(j, "bg_overlap_max", c.bg_overlap_max);
  get(j, "rae_hidden", c.rae.hidden);
  get(j, "rae_lambda", c.rae.lambda);
  get(j, "rae_epochs", c.rae.epochs);
  get(j, "rae_batch_size", c.rae.batch_size);
  get(j, "rae_learning_rate", c.rae.learning_rate);
  get(j, "rae_center_input", c.rae.center_input);
}

Json to_json(const TrackerConfig& c) {
  Json j;
  const Eigen::Matrix3d& q = c.q.matrix();
  j["n_samples"] = c.n_samples;
  j["q_sigma_x"] = std::sqrt(q(0, 0));
  j["q_sigma_y"] = std::sqrt(q(1, 1));
  j["q_sigma_theta"] = std::sqrt(q(2, 2));
  j["descent_max_iters"] = c.descent.max_iters;
  j["descent_initial_step"] = {c.descent.initial_step[0], c.descent.initial_step[1],
                               c.descent.initial_step[2]};
  j["descent_backtracking"] = c.descent.backtracking;
  j["descent_armijo"] = c.descent.armijo;
  j["descent_convergence_step_norm"] = c.descent.convergence_step_norm;
  j["whole_chain"] = c.whole_chain;
  j["chain_iters"] = c.chain_iters;
  return j;
}

void apply_json(const Json& j, TrackerConfig& c) {
  check_keys(j,
             {"n_samples", "q_sigma_x", "q_sigma_y", "q_sigma_theta", "descent_max_iters",
              "descent_initial_step", "descent_backtracking", "descent_armijo",
              "descent_convergence_step_norm", "whole_chain", "chain_iters"},
             "track");
  get(j, "n_samples", c.n_samples);
  const Eigen::Matrix3d& q = c.q.matrix();
  double sx = std::sqrt(q(0, 0));
  double sy = std::sqrt(q(1, 1));
  double st = std::sqrt(q(2, 2));
  get(j, "q_sigma_x", sx);
  get(j, "q_sigma_y", sy);
  get(j, "q_sigma_theta", st);
  c.q = TangentCovariance::from_sigmas(sx, sy, st);
  get(j, "descent_max_iters", c.descent.max_iters);
  if (j.contains("descent_initial_step")) {
    std::vector<double> s;
    get(j, "descent_initial_step", s);
    if (s.size() != 3) throw ConfigError("descent_initial_step needs three entries");
    c.descent.initial_step = Eigen::Vector3d(s[0], s[1], s[2]);
  }
  get(j, "descent_backtracking", c.descent.backtracking);
  get(j, "descent_armijo", c.descent.armijo);
  get(j, "descent_convergence_step_norm", c.descent.convergence_step_norm);
  get(j, "whole_chain", c.whole_chain);
  get(j, "chain_iters", c.chain_iters);
}

std::string config_hash(const Json& j) { return sha256_hex(j.dump()); }

}  // namespace dft::cli
