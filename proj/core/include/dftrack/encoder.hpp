#pragma once

// Feature encoders C: flattened patch (length input_dim) -> code (length dim).
// backprop() is the adjoint of the linearisation of encode() at x.

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "dftrack/container.hpp"

namespace dft {

enum class EncoderKind { kRandomProjection, kPpca, kRae };

const char* encoder_kind_name(EncoderKind kind);
// Accepts "rp", "ppca", "rae"; throws ConfigError otherwise.
EncoderKind parse_encoder_kind(const std::string& name);

class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual EncoderKind kind() const = 0;
  virtual int input_dim() const = 0;
  virtual int dim() const = 0;

  virtual Eigen::VectorXd encode(const Eigen::VectorXd& x) const = 0;
  // Columns of x are patches; returns one code per column.
  virtual Eigen::MatrixXd encode_batch(const Eigen::MatrixXd& x) const;
  virtual Eigen::VectorXd backprop(const Eigen::VectorXd& x, const Eigen::VectorXd& dl_dc) const = 0;

  virtual Container to_container() const = 0;

  void save(const std::filesystem::path& path) const { to_container().save(path); }

 protected:
  void check_input(const Eigen::VectorXd& x) const;
};

std::shared_ptr<const Encoder> encoder_from_container(const Container& c);
std::shared_ptr<const Encoder> load_encoder(const std::filesystem::path& path);

// c = A^T x / sqrt(k), A ~ N(0, 1) entrywise, drawn from a seeded stream.
class RandomProjectionEncoder final : public Encoder {
 public:
  RandomProjectionEncoder(int input_dim, int k, std::uint64_t seed);
  RandomProjectionEncoder(Eigen::MatrixXd a, std::uint64_t seed);

  EncoderKind kind() const override { return EncoderKind::kRandomProjection; }
  int input_dim() const override { return static_cast<int>(a_.rows()); }
  int dim() const override { return static_cast<int>(a_.cols()); }

  Eigen::VectorXd encode(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd encode_batch(const Eigen::MatrixXd& x) const override;
  Eigen::VectorXd backprop(const Eigen::VectorXd& x, const Eigen::VectorXd& dl_dc) const override;
  Container to_container() const override;

  const Eigen::MatrixXd& matrix() const { return a_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Eigen::MatrixXd a_;
  std::uint64_t seed_ = 0;
  double scale_ = 1.0;
};

// Probabilistic PCA, x = W c + mu + eps, eps ~ N(0, sigma^2 I). Encodes to
// the posterior mean M^-1 W^T (x - mu) with M = W^T W + sigma^2 I.
class PpcaEncoder final : public Encoder {
 public:
  PpcaEncoder(Eigen::MatrixXd w, Eigen::VectorXd mu, double sigma_sq);

  EncoderKind kind() const override { return EncoderKind::kPpca; }
  int input_dim() const override { return static_cast<int>(w_.rows()); }
  int dim() const override { return static_cast<int>(w_.cols()); }

  Eigen::VectorXd encode(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd encode_batch(const Eigen::MatrixXd& x) const override;
  Eigen::VectorXd backprop(const Eigen::VectorXd& x, const Eigen::VectorXd& dl_dc) const override;
  Container to_container() const override;

  const Eigen::MatrixXd& loadings() const { return w_; }
  const Eigen::VectorXd& mean() const { return mu_; }
  double sigma_sq() const { return sigma_sq_; }
  const Eigen::MatrixXd& m() const { return m_; }
  // Posterior covariance sigma^2 M^-1.
  Eigen::MatrixXd posterior_covariance() const;
  // W c + mu.
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& c) const { return w_ * c + mu_; }

 private:
  Eigen::MatrixXd w_;
  Eigen::VectorXd mu_;
  double sigma_sq_;
  Eigen::MatrixXd m_;
  Eigen::MatrixXd projection_;  // M^-1 W^T
};

struct PpcaFit {
  std::shared_ptr<const PpcaEncoder> model;
  // Eigenvalues of the sample covariance, descending.
  Eigen::VectorXd eigenvalues;
};

// Maximum-likelihood PPCA on the columns of samples with rotation R = I.
// Throws FitError when there are not more samples than q or q >= input dim.
PpcaFit ppca_fit(const Eigen::MatrixXd& samples, int q);

}  // namespace dft
