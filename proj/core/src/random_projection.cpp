#include <cmath>
#include <random>

#include "dftrack/encoder.hpp"
#include "dftrack/error.hpp"

namespace dft {

RandomProjectionEncoder::RandomProjectionEncoder(int input_dim, int k, std::uint64_t seed)
    : seed_(seed) {
  if (input_dim <= 0 || k <= 0) throw ConfigError("random projection dims must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  a_.resize(input_dim, k);
  // Column-major fill keeps the stream order tied to the storage order.
  for (Eigen::Index j = 0; j < a_.cols(); ++j) {
    for (Eigen::Index i = 0; i < a_.rows(); ++i) a_(i, j) = normal(rng);
  }
  scale_ = 1.0 / std::sqrt(static_cast<double>(k));
}

RandomProjectionEncoder::RandomProjectionEncoder(Eigen::MatrixXd a, std::uint64_t seed)
    : a_(std::move(a)), seed_(seed), scale_(1.0 / std::sqrt(static_cast<double>(a_.cols()))) {
  if (a_.size() == 0) throw ConfigError("empty random projection matrix");
}

Eigen::VectorXd RandomProjectionEncoder::encode(const Eigen::VectorXd& x) const {
  check_input(x);
  return scale_ * (a_.transpose() * x);
}

Eigen::MatrixXd RandomProjectionEncoder::encode_batch(const Eigen::MatrixXd& x) const {
  if (x.rows() != a_.rows()) throw ContractError("random projection batch has wrong row count");
  return scale_ * (a_.transpose() * x);
}

Eigen::VectorXd RandomProjectionEncoder::backprop(const Eigen::VectorXd& x,
                                                  const Eigen::VectorXd& dl_dc) const {
  check_input(x);
  if (dl_dc.size() != dim()) throw ContractError("random projection gradient has wrong length");
  return scale_ * (a_ * dl_dc);
}

Container RandomProjectionEncoder::to_container() const {
  Container c;
  c.kind = ModelKind::kRandomProjection;
  c.dims = {static_cast<std::uint64_t>(a_.rows()), static_cast<std::uint64_t>(a_.cols()), seed_};
  c.arrays.emplace_back(a_.data(), a_.data() + a_.size());
  return c;
}

}  // namespace dft
