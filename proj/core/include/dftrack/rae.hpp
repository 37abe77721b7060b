#pragma once

// Regularized autoencoder: dense encoder (ReLU hidden layers, linear code
// layer) and a mirrored decoder, trained with
//   ||x - D(C(x))||^2 + 1/2 ||C(x)||^2 + lambda * ||theta_D||^2
// by mini-batch Adam. theta_D covers decoder weight matrices (not biases).

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "dftrack/container.hpp"
#include "dftrack/encoder.hpp"

namespace dft {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
  bool relu = false;

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
};

struct RaeConfig {
  int code_dim = 256;
  std::vector<int> hidden = {512};
  double lambda = 1e-4;
  int epochs = 300;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  // Subtract the training mean patch before the first layer.
  bool center_input = true;
};

class RaeModel {
 public:
  RaeModel() = default;
  // Randomly initialised network (He-normal on ReLU layers, 1/fan_in on linear).
  RaeModel(int input_dim, const RaeConfig& config);

  int input_dim() const { return static_cast<int>(input_offset_.size()); }
  int code_dim() const;

  std::vector<DenseLayer>& encoder_layers() { return encoder_; }
  std::vector<DenseLayer>& decoder_layers() { return decoder_; }
  const std::vector<DenseLayer>& encoder_layers() const { return encoder_; }
  const std::vector<DenseLayer>& decoder_layers() const { return decoder_; }
  Eigen::VectorXd& input_offset() { return input_offset_; }
  const Eigen::VectorXd& input_offset() const { return input_offset_; }
  const RaeConfig& config() const { return config_; }

  Eigen::MatrixXd encode_batch(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd decode_batch(const Eigen::MatrixXd& c) const;
  Eigen::VectorXd encode(const Eigen::VectorXd& x) const;
  Eigen::VectorXd decode(const Eigen::VectorXd& c) const;
  Eigen::VectorXd backprop(const Eigen::VectorXd& x, const Eigen::VectorXd& dl_dc) const;

  // Per-column losses averaged over columns.
  double reconstruction_loss(const Eigen::MatrixXd& x) const;
  double decoder_weight_norm_sq() const;

  Container to_container() const;
  static RaeModel from_container(const Container& c);

  bool operator==(const RaeModel& other) const;

 private:
  RaeConfig config_;
  Eigen::VectorXd input_offset_;
  std::vector<DenseLayer> encoder_;
  std::vector<DenseLayer> decoder_;
};

class RaeEncoder final : public Encoder {
 public:
  explicit RaeEncoder(RaeModel model) : model_(std::move(model)) {}

  EncoderKind kind() const override { return EncoderKind::kRae; }
  int input_dim() const override { return model_.input_dim(); }
  int dim() const override { return model_.code_dim(); }

  Eigen::VectorXd encode(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd encode_batch(const Eigen::MatrixXd& x) const override;
  Eigen::VectorXd backprop(const Eigen::VectorXd& x, const Eigen::VectorXd& dl_dc) const override;
  Container to_container() const override { return model_.to_container(); }

  const RaeModel& model() const { return model_; }

 private:
  RaeModel model_;
};

struct RaeTrainResult {
  RaeModel model;
  std::vector<double> epoch_loss;      // mean total loss per epoch
  std::vector<double> epoch_rec_loss;  // mean reconstruction term per epoch
};

// Trains on the columns of patches (at least 100). Throws TrainingError on a
// non-finite loss, naming the epoch.
RaeTrainResult rae_train(const Eigen::MatrixXd& patches, const RaeConfig& config);

// Continues training an existing model in place with the given settings.
RaeTrainResult rae_train_from(RaeModel model, const Eigen::MatrixXd& patches,
                              const RaeConfig& config);

}  // namespace dft
