#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <filesystem>
#include <string>

#include "dftrack/container.hpp"

namespace dft {

enum class CovarianceKind { kFull, kDiagonal };

const char* covariance_kind_name(CovarianceKind kind);
// "full" or "diag"/"diagonal"; throws ConfigError otherwise.
CovarianceKind parse_covariance_kind(const std::string& name);

// Multivariate normal over feature space with cached Cholesky factor and
// log-determinant. Diagonal densities store only the variances.
class GaussianDensity {
 public:
  GaussianDensity() = default;
  // Throws FitError if the covariance is not positive-definite.
  GaussianDensity(Eigen::VectorXd mean, Eigen::MatrixXd covariance);
  GaussianDensity(Eigen::VectorXd mean, Eigen::VectorXd variances);

  CovarianceKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  // Full matrix regardless of kind.
  Eigen::MatrixXd covariance() const;
  const Eigen::MatrixXd& full_covariance() const { return cov_; }
  const Eigen::VectorXd& variances() const { return var_; }
  double log_det() const { return log_det_; }

  // 1/2 (c - mu)^T Sigma^-1 (c - mu) + 1/2 log det(2 pi Sigma)
  double nll(const Eigen::VectorXd& c) const;
  // NLL of each column.
  Eigen::VectorXd nll_batch(const Eigen::MatrixXd& c) const;
  // Sigma^-1 (c - mu)
  Eigen::VectorXd nll_grad(const Eigen::VectorXd& c) const;
  // (c - mu)^T Sigma^-1 (c - mu)
  double mahalanobis_sq(const Eigen::VectorXd& c) const;
  // 1/2 log det(2 pi Sigma)
  double normalizer() const;

  // Same covariance, shifted mean.
  GaussianDensity with_mean(Eigen::VectorXd mean) const;

  Container to_container() const;
  static GaussianDensity from_container(const Container& c);
  void save(const std::filesystem::path& path) const { to_container().save(path); }
  static GaussianDensity load(const std::filesystem::path& path);

  bool operator==(const GaussianDensity& other) const;

 private:
  void factorize();

  CovarianceKind kind_ = CovarianceKind::kFull;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;  // full kind only
  Eigen::VectorXd var_;  // diagonal kind only
  Eigen::MatrixXd chol_lower_;
  Eigen::VectorXd inv_var_;
  double log_det_ = 0.0;
};

// Regularisation added to the MLE covariance: epsilon = 1e-6 * trace / d.
inline constexpr double kCovarianceShrinkage = 1e-6;

// MLE fit (divide by N) over the columns of samples, plus epsilon * I.
// Throws FitError with fewer than two samples.
GaussianDensity fit_gaussian(const Eigen::MatrixXd& samples, CovarianceKind kind);

}  // namespace dft
