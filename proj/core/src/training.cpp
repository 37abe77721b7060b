#include "dftrack/training.hpp"

#include <fstream>

#include <json.hpp>

#include "dftrack/error.hpp"
#include "dftrack/metrics.hpp"
#include "dftrack/tracker.hpp"

namespace dft {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (dim < 1) throw ConfigError("encoder dim must be at least 1");
  if (!spec.valid()) throw ConfigError("patch spec dims must be positive");
  if (dim > spec.dim()) {
    throw ConfigError("encoder dim " + std::to_string(dim) + " exceeds patch dim " +
                      std::to_string(spec.dim()));
  }
  if (bg_per_frame < 0) throw ConfigError("bg_per_frame must be non-negative");
  if (!(bg_overlap_max >= 0.0 && bg_overlap_max < 1.0)) {
    throw ConfigError("bg_overlap_max must lie in [0, 1)");
  }
}

PatchSet harvest_patches(const Dataset& data, FrameRange range, const TrainConfig& config) {
  config.validate();
  const DatasetInfo& info = data.info();
  TrackerConfig tc;
  tc.bg_per_frame = config.bg_per_frame;
  tc.bg_overlap_max = config.bg_overlap_max;

  std::vector<Pose2> fg_poses;
  std::vector<int> fg_frames;
  for (int k = range.begin; k < range.end; ++k) {
    for (const auto& g : data.poses_in_frame(k)) {
      fg_poses.push_back(g);
      fg_frames.push_back(k);
    }
  }
  const Eigen::Index d = config.spec.dim();
  PatchSet out;
  out.foreground.resize(d, static_cast<Eigen::Index>(fg_poses.size()));
  out.background.resize(d, static_cast<Eigen::Index>(range.size()) * config.bg_per_frame);

  Eigen::Index fi = 0;
  Eigen::Index bi = 0;
  for (int k = range.begin; k < range.end; ++k) {
    const GrayImage frame = data.load_frame(k);
    std::vector<OrientedBox> boxes;
    for (std::size_t i = 0; i < fg_poses.size(); ++i) {
      if (fg_frames[i] != k) continue;
      boxes.push_back({fg_poses[i], info.box_width, info.box_height});
      extract_values(fg_poses[i], frame, config.spec, out.foreground.col(fi++));
    }
    // Stream keyed apart from tracking streams by a negative track id.
    auto rng = frame_rng(config.seed, -1, k);
    for (const auto& g :
         bg_sample_poses(info.frame_width, info.frame_height, boxes, config.spec, tc, rng)) {
      extract_values(g, frame, config.spec, out.background.col(bi++));
    }
  }
  return out;
}

void ModelBundle::save(const fs::path& dir) const {
  fs::create_directories(dir);
  encoder->save(dir / "encoder.bin");
  foreground.save(dir / "fg.bin");
  background.save(dir / "bg.bin");
  nlohmann::ordered_json j;
  j["box_width"] = spec.box_width;
  j["box_height"] = spec.box_height;
  j["grid_cols"] = spec.grid_cols;
  j["grid_rows"] = spec.grid_rows;
  j["oriented"] = spec.oriented;
  std::ofstream out(dir / "patch_spec.json", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "patch_spec.json").string());
  out << j.dump(2) << '\n';
}

ModelBundle ModelBundle::load(const fs::path& dir) {
  ModelBundle b;
  b.encoder = load_encoder(dir / "encoder.bin");
  b.foreground = GaussianDensity::load(dir / "fg.bin");
  b.background = GaussianDensity::load(dir / "bg.bin");
  const fs::path sp = dir / "patch_spec.json";
  std::ifstream in(sp, std::ios::binary);
  if (!in) throw IoError("cannot open " + sp.string());
  try {
    const auto j = nlohmann::json::parse(in);
    b.spec.box_width = j.at("box_width").get<double>();
    b.spec.box_height = j.at("box_height").get<double>();
    b.spec.grid_cols = j.at("grid_cols").get<int>();
    b.spec.grid_rows = j.at("grid_rows").get<int>();
    b.spec.oriented = j.at("oriented").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(sp.string() + ": " + e.what());
  }
  if (!b.spec.valid()) throw IoError(sp.string() + ": invalid patch spec");
  // Constructing the factor checks the dims agree.
  (void)b.likelihood();
  return b;
}

TrainResult train_models(const PatchSet& patches, const TrainConfig& config) {
  config.validate();
  if (patches.foreground.rows() != config.spec.dim() ||
      patches.background.rows() != config.spec.dim()) {
    throw ContractError("patch length does not match the patch spec");
  }
  TrainResult r;
  r.num_foreground = static_cast<int>(patches.foreground.cols());
  r.num_background = static_cast<int>(patches.background.cols());
  switch (config.encoder) {
    case EncoderKind::kRandomProjection:
      r.models.encoder =
          std::make_shared<RandomProjectionEncoder>(config.spec.dim(), config.dim, config.seed);
      break;
    case EncoderKind::kPpca:
      r.models.encoder = ppca_fit(patches.foreground, config.dim).model;
      break;
    case EncoderKind::kRae: {
      RaeConfig rc = config.rae;
      rc.code_dim = config.dim;
      rc.seed = config.seed;
      RaeTrainResult tr = rae_train(patches.foreground, rc);
      r.rae_epoch_loss = std::move(tr.epoch_loss);
      r.models.encoder = std::make_shared<RaeEncoder>(std::move(tr.model));
      break;
    }
  }
  r.models.spec = config.spec;
  r.models.foreground =
      fit_gaussian(r.models.encoder->encode_batch(patches.foreground), config.fg_covariance);
  r.models.background =
      fit_gaussian(r.models.encoder->encode_batch(patches.background), config.bg_covariance);
  return r;
}

ModelBundle refit_densities(const ModelBundle& base, const PatchSet& patches,
                            CovarianceKind fg_kind, CovarianceKind bg_kind) {
  ModelBundle b = base;
  b.foreground = fit_gaussian(base.encoder->encode_batch(patches.foreground), fg_kind);
  b.background = fit_gaussian(base.encoder->encode_batch(patches.background), bg_kind);
  return b;
}

TrainResult train_pipeline(const Dataset& data, const TrainConfig& config) {
  const PatchSet patches = harvest_patches(data, data.info().train_range, config);
  if (patches.foreground.cols() < 2) {
    throw FitError("training split holds " + std::to_string(patches.foreground.cols()) +
                   " labelled poses; at least 2 are needed");
  }
  return train_models(patches, config);
}

}  // namespace dft
