#include "dftrack/rae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dftrack/error.hpp"

namespace dft {
namespace {

DenseLayer make_layer(int in, int out, bool relu, std::mt19937_64& rng) {
  DenseLayer layer;
  layer.relu = relu;
  layer.weight.resize(out, in);
  layer.bias = Eigen::VectorXd::Zero(out);
  const double stddev = std::sqrt((relu ? 2.0 : 1.0) / static_cast<double>(in));
  std::normal_distribution<double> normal(0.0, stddev);
  for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = normal(rng);
  }
  return layer;
}

// Activations of a stack: acts[0] is the input, acts[i + 1] the output of
// layer i; pre[i] is layer i's pre-activation.
struct Trace {
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> acts;
};

Eigen::MatrixXd forward(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x,
                        Trace* trace) {
  Eigen::MatrixXd a = x;
  if (trace) {
    trace->pre.clear();
    trace->acts.clear();
    trace->acts.push_back(a);
  }
  for (const auto& layer : layers) {
    Eigen::MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    if (trace) trace->pre.push_back(z);
    a = layer.relu ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
    if (trace) trace->acts.push_back(a);
  }
  return a;
}

struct LayerGrad {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

// Reverse pass; returns dL/dinput and fills per-layer gradients.
Eigen::MatrixXd backward(const std::vector<DenseLayer>& layers, const Trace& trace,
                         Eigen::MatrixXd grad_out, std::vector<LayerGrad>* grads) {
  if (grads) grads->resize(layers.size());
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& layer = layers[k];
    if (layer.relu) grad_out = grad_out.cwiseProduct((trace.pre[k].array() > 0.0).cast<double>().matrix());
    if (grads) {
      (*grads)[k].weight = grad_out * trace.acts[k].transpose();
      (*grads)[k].bias = grad_out.rowwise().sum();
    }
    grad_out = layer.weight.transpose() * grad_out;
  }
  return grad_out;
}

struct AdamSlot {
  Eigen::MatrixXd m_w, v_w;
  Eigen::VectorXd m_b, v_b;
};

void adam_step(std::vector<DenseLayer>& layers, const std::vector<LayerGrad>& grads,
               std::vector<AdamSlot>& slots, const RaeConfig& cfg, long step) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  const double lr = cfg.learning_rate;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto& s = slots[k];
    const auto& g = grads[k];
    s.m_w = cfg.beta1 * s.m_w + (1.0 - cfg.beta1) * g.weight;
    s.v_w = cfg.beta2 * s.v_w + (1.0 - cfg.beta2) * g.weight.cwiseAbs2();
    s.m_b = cfg.beta1 * s.m_b + (1.0 - cfg.beta1) * g.bias;
    s.v_b = cfg.beta2 * s.v_b + (1.0 - cfg.beta2) * g.bias.cwiseAbs2();
    layers[k].weight.array() -=
        lr * (s.m_w.array() / bc1) / ((s.v_w.array() / bc2).sqrt() + cfg.epsilon);
    layers[k].bias.array() -=
        lr * (s.m_b.array() / bc1) / ((s.v_b.array() / bc2).sqrt() + cfg.epsilon);
  }
}

std::vector<AdamSlot> make_slots(const std::vector<DenseLayer>& layers) {
  std::vector<AdamSlot> slots(layers.size());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    slots[k].m_w = Eigen::MatrixXd::Zero(layers[k].weight.rows(), layers[k].weight.cols());
    slots[k].v_w = slots[k].m_w;
    slots[k].m_b = Eigen::VectorXd::Zero(layers[k].bias.size());
    slots[k].v_b = slots[k].m_b;
  }
  return slots;
}

}  // namespace

RaeModel::RaeModel(int input_dim, const RaeConfig& config) : config_(config) {
  if (input_dim <= 0 || config.code_dim <= 0) throw ConfigError("rae dims must be positive");
  for (int h : config.hidden) {
    if (h <= 0) throw ConfigError("rae hidden widths must be positive");
  }
  std::mt19937_64 rng(config.seed);
  input_offset_ = Eigen::VectorXd::Zero(input_dim);
  int in = input_dim;
  for (int h : config.hidden) {
    encoder_.push_back(make_layer(in, h, true, rng));
    in = h;
  }
  encoder_.push_back(make_layer(in, config.code_dim, false, rng));
  in = config.code_dim;
  for (auto it = config.hidden.rbegin(); it != config.hidden.rend(); ++it) {
    decoder_.push_back(make_layer(in, *it, true, rng));
    in = *it;
  }
  decoder_.push_back(make_layer(in, input_dim, false, rng));
}

int RaeModel::code_dim() const { return encoder_.empty() ? 0 : encoder_.back().out_dim(); }

Eigen::MatrixXd RaeModel::encode_batch(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_dim()) throw ContractError("rae batch has wrong row count");
  return forward(encoder_, x.colwise() - input_offset_, nullptr);
}

Eigen::MatrixXd RaeModel::decode_batch(const Eigen::MatrixXd& c) const {
  Eigen::MatrixXd y = forward(decoder_, c, nullptr);
  y.colwise() += input_offset_;
  return y;
}

Eigen::VectorXd RaeModel::encode(const Eigen::VectorXd& x) const { return encode_batch(x); }
Eigen::VectorXd RaeModel::decode(const Eigen::VectorXd& c) const { return decode_batch(c); }

Eigen::VectorXd RaeModel::backprop(const Eigen::VectorXd& x, const Eigen::VectorXd& dl_dc) const {
  if (x.size() != input_dim()) throw ContractError("rae input has wrong length");
  if (dl_dc.size() != code_dim()) throw ContractError("rae code gradient has wrong length");
  Trace trace;
  forward(encoder_, x - input_offset_, &trace);
  return backward(encoder_, trace, dl_dc, nullptr);
}

double RaeModel::reconstruction_loss(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd y = decode_batch(encode_batch(x));
  return (x - y).squaredNorm() / static_cast<double>(x.cols());
}

double RaeModel::decoder_weight_norm_sq() const {
  double s = 0.0;
  for (const auto& layer : decoder_) s += layer.weight.squaredNorm();
  return s;
}

bool RaeModel::operator==(const RaeModel& other) const {
  auto same = [](const std::vector<DenseLayer>& a, const std::vector<DenseLayer>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k].relu != b[k].relu || a[k].weight != b[k].weight || a[k].bias != b[k].bias) {
        return false;
      }
    }
    return true;
  };
  return input_offset_ == other.input_offset_ && same(encoder_, other.encoder_) &&
         same(decoder_, other.decoder_);
}

Container RaeModel::to_container() const {
  Container c;
  c.kind = ModelKind::kRae;
  c.dims = {static_cast<std::uint64_t>(input_dim()), encoder_.size(), decoder_.size(),
            static_cast<std::uint64_t>(config_.epochs),
            static_cast<std::uint64_t>(config_.batch_size), config_.seed,
            config_.center_input ? 1u : 0u};
  for (const auto* stack : {&encoder_, &decoder_}) {
    for (const auto& layer : *stack) {
      c.dims.push_back(static_cast<std::uint64_t>(layer.out_dim()));
      c.dims.push_back(static_cast<std::uint64_t>(layer.in_dim()));
      c.dims.push_back(layer.relu ? 1u : 0u);
    }
  }
  c.arrays.push_back({config_.lambda, config_.learning_rate, config_.beta1, config_.beta2,
                      config_.epsilon});
  c.arrays.emplace_back(input_offset_.data(), input_offset_.data() + input_offset_.size());
  for (const auto* stack : {&encoder_, &decoder_}) {
    for (const auto& layer : *stack) {
      c.arrays.emplace_back(layer.weight.data(), layer.weight.data() + layer.weight.size());
      c.arrays.emplace_back(layer.bias.data(), layer.bias.data() + layer.bias.size());
    }
  }
  return c;
}

RaeModel RaeModel::from_container(const Container& c) {
  if (c.kind != ModelKind::kRae || c.dims.size() < 7) throw IoError("malformed rae container");
  RaeModel m;
  const auto n = static_cast<Eigen::Index>(c.dims[0]);
  const auto n_enc = c.dims[1];
  const auto n_dec = c.dims[2];
  if (n_enc == 0 || n_dec == 0 || c.dims.size() != 7 + 3 * (n_enc + n_dec) ||
      c.arrays.size() != 2 + 2 * (n_enc + n_dec) || c.arrays[0].size() != 5 ||
      static_cast<Eigen::Index>(c.arrays[1].size()) != n) {
    throw IoError("rae container layout mismatch");
  }
  m.config_.epochs = static_cast<int>(c.dims[3]);
  m.config_.batch_size = static_cast<int>(c.dims[4]);
  m.config_.seed = c.dims[5];
  m.config_.center_input = c.dims[6] != 0;
  m.config_.lambda = c.arrays[0][0];
  m.config_.learning_rate = c.arrays[0][1];
  m.config_.beta1 = c.arrays[0][2];
  m.config_.beta2 = c.arrays[0][3];
  m.config_.epsilon = c.arrays[0][4];
  m.input_offset_ = Eigen::Map<const Eigen::VectorXd>(c.arrays[1].data(), n);
  std::size_t di = 7;
  std::size_t ai = 2;
  for (std::uint64_t k = 0; k < n_enc + n_dec; ++k) {
    DenseLayer layer;
    const auto out = static_cast<Eigen::Index>(c.dims[di]);
    const auto in = static_cast<Eigen::Index>(c.dims[di + 1]);
    layer.relu = c.dims[di + 2] != 0;
    di += 3;
    if (static_cast<Eigen::Index>(c.arrays[ai].size()) != out * in ||
        static_cast<Eigen::Index>(c.arrays[ai + 1].size()) != out) {
      throw IoError("rae container layer size mismatch");
    }
    layer.weight = Eigen::Map<const Eigen::MatrixXd>(c.arrays[ai].data(), out, in);
    layer.bias = Eigen::Map<const Eigen::VectorXd>(c.arrays[ai + 1].data(), out);
    ai += 2;
    (k < n_enc ? m.encoder_ : m.decoder_).push_back(std::move(layer));
  }
  m.config_.code_dim = m.code_dim();
  m.config_.hidden.clear();
  for (std::size_t k = 0; k + 1 < m.encoder_.size(); ++k) {
    m.config_.hidden.push_back(m.encoder_[k].out_dim());
  }
  return m;
}

Eigen::VectorXd RaeEncoder::encode(const Eigen::VectorXd& x) const {
  check_input(x);
  return model_.encode(x);
}

Eigen::MatrixXd RaeEncoder::encode_batch(const Eigen::MatrixXd& x) const {
  return model_.encode_batch(x);
}

Eigen::VectorXd RaeEncoder::backprop(const Eigen::VectorXd& x, const Eigen::VectorXd& dl_dc) const {
  check_input(x);
  return model_.backprop(x, dl_dc);
}

RaeTrainResult rae_train(const Eigen::MatrixXd& patches, const RaeConfig& config) {
  RaeModel model(static_cast<int>(patches.rows()), config);
  if (config.center_input && patches.cols() > 0) model.input_offset() = patches.rowwise().mean();
  return rae_train_from(std::move(model), patches, config);
}

RaeTrainResult rae_train_from(RaeModel model, const Eigen::MatrixXd& patches,
                              const RaeConfig& config) {
  const auto n = patches.cols();
  if (n < 100) {
    throw TrainingError("rae training needs at least 100 patches, got " + std::to_string(n));
  }
  if (patches.rows() != model.input_dim()) throw ContractError("rae training patch length mismatch");
  if (config.batch_size <= 0 || config.epochs < 0) throw ConfigError("invalid rae batch/epochs");

  auto& enc = model.encoder_layers();
  auto& dec = model.decoder_layers();
  auto enc_slots = make_slots(enc);
  auto dec_slots = make_slots(dec);

  // The shuffle stream is distinct from the initialisation stream.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  RaeTrainResult result;
  long step = 0;
  const Eigen::MatrixXd centered = patches.colwise() - model.input_offset();
  Trace enc_trace;
  Trace dec_trace;
  std::vector<LayerGrad> enc_grads;
  std::vector<LayerGrad> dec_grads;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    double rec_total = 0.0;
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(config.batch_size, n - start);
      Eigen::MatrixXd xb(patches.rows(), b);
      for (Eigen::Index j = 0; j < b; ++j) xb.col(j) = centered.col(order[start + j]);

      const Eigen::MatrixXd code = forward(enc, xb, &enc_trace);
      const Eigen::MatrixXd recon = forward(dec, code, &dec_trace);
      const Eigen::MatrixXd diff = recon - xb;
      const double inv_b = 1.0 / static_cast<double>(b);
      const double rec = diff.squaredNorm() * inv_b;
      const double code_pen = 0.5 * code.squaredNorm() * inv_b;
      const double reg = config.lambda * model.decoder_weight_norm_sq();
      const double loss = rec + code_pen + reg;
      if (!std::isfinite(loss)) {
        throw TrainingError("rae training loss became non-finite at epoch " +
                            std::to_string(epoch));
      }
      total += loss * static_cast<double>(b);
      rec_total += rec * static_cast<double>(b);

      const Eigen::MatrixXd grad_code =
          backward(dec, dec_trace, (2.0 * inv_b) * diff, &dec_grads) + inv_b * code;
      backward(enc, enc_trace, grad_code, &enc_grads);
      for (std::size_t k = 0; k < dec.size(); ++k) {
        dec_grads[k].weight += (2.0 * config.lambda) * dec[k].weight;
      }
      ++step;
      adam_step(enc, enc_grads, enc_slots, config, step);
      adam_step(dec, dec_grads, dec_slots, config, step);
    }
    result.epoch_loss.push_back(total / static_cast<double>(n));
    result.epoch_rec_loss.push_back(rec_total / static_cast<double>(n));
  }
  result.model = std::move(model);
  return result;
}

}  // namespace dft
