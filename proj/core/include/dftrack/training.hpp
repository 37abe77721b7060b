#pragma once

// Training-time data assembly and model fitting: harvest foreground patches
// at labelled poses and background patches away from every target, train or
// draw the encoder, then fit the two feature densities.

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "dftrack/dataset.hpp"
#include "dftrack/density.hpp"
#include "dftrack/encoder.hpp"
#include "dftrack/factors.hpp"
#include "dftrack/rae.hpp"
#include "dftrack/warp.hpp"

namespace dft {

struct TrainConfig {
  EncoderKind encoder = EncoderKind::kRae;
  int dim = 256;
  std::uint64_t seed = 0;
  PatchSpec spec;
  CovarianceKind fg_covariance = CovarianceKind::kFull;
  CovarianceKind bg_covariance = CovarianceKind::kFull;
  int bg_per_frame = 30;
  double bg_overlap_max = 0.1;
  // RAE settings other than code_dim and seed, which follow dim and seed.
  RaeConfig rae;

  void validate() const;
};

struct PatchSet {
  Eigen::MatrixXd foreground;  // one patch per column
  Eigen::MatrixXd background;
};

// Patches from every labelled pose and bg_per_frame background draws in each
// frame of range. Background boxes are placed with the spec's placement pose
// and must overlap every labelled box (at dataset box dims) by IoU below
// bg_overlap_max.
PatchSet harvest_patches(const Dataset& data, FrameRange range, const TrainConfig& config);

struct ModelBundle {
  std::shared_ptr<const Encoder> encoder;
  GaussianDensity foreground;
  GaussianDensity background;
  PatchSpec spec;

  LikelihoodFactor likelihood() const { return {encoder, foreground, background, spec}; }

  // encoder.bin, fg.bin, bg.bin and patch_spec.json.
  void save(const std::filesystem::path& dir) const;
  static ModelBundle load(const std::filesystem::path& dir);
};

struct TrainResult {
  ModelBundle models;
  int num_foreground = 0;
  int num_background = 0;
  std::vector<double> rae_epoch_loss;  // empty for linear encoders
};

// Builds the encoder (RP draws its matrix, PPCA and RAE fit on the
// foreground patches) and fits both densities on the encoded patches.
TrainResult train_models(const PatchSet& patches, const TrainConfig& config);

// Refits the densities of an existing encoder with other covariance kinds.
ModelBundle refit_densities(const ModelBundle& base, const PatchSet& patches,
                            CovarianceKind fg_kind, CovarianceKind bg_kind);

// harvest_patches over the dataset's training split, then train_models.
TrainResult train_pipeline(const Dataset& data, const TrainConfig& config);

}  // namespace dft
