#include "dftrack/density.hpp"

#include <cmath>
#include <numbers>

#include "dftrack/error.hpp"

namespace dft {

const char* covariance_kind_name(CovarianceKind kind) {
  return kind == CovarianceKind::kFull ? "full" : "diag";
}

CovarianceKind parse_covariance_kind(const std::string& name) {
  if (name == "full") return CovarianceKind::kFull;
  if (name == "diag" || name == "diagonal") return CovarianceKind::kDiagonal;
  throw ConfigError("unknown covariance kind '" + name + "' (expected full or diag)");
}

GaussianDensity::GaussianDensity(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : kind_(CovarianceKind::kFull), mean_(std::move(mean)), cov_(std::move(covariance)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw ContractError("gaussian mean/covariance dimension mismatch");
  }
  factorize();
}

GaussianDensity::GaussianDensity(Eigen::VectorXd mean, Eigen::VectorXd variances)
    : kind_(CovarianceKind::kDiagonal), mean_(std::move(mean)), var_(std::move(variances)) {
  if (var_.size() != mean_.size()) throw ContractError("gaussian mean/variance dimension mismatch");
  factorize();
}

void GaussianDensity::factorize() {
  if (kind_ == CovarianceKind::kFull) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov_);
    if (llt.info() != Eigen::Success) throw FitError("covariance is not positive-definite");
    chol_lower_ = llt.matrixL();
    log_det_ = 2.0 * chol_lower_.diagonal().array().log().sum();
  } else {
    if ((var_.array() <= 0.0).any() || !var_.allFinite()) {
      throw FitError("diagonal covariance has non-positive variance");
    }
    inv_var_ = var_.cwiseInverse();
    log_det_ = var_.array().log().sum();
  }
}

Eigen::MatrixXd GaussianDensity::covariance() const {
  if (kind_ == CovarianceKind::kFull) return cov_;
  return var_.asDiagonal();
}

double GaussianDensity::normalizer() const {
  return 0.5 * (dim() * std::log(2.0 * std::numbers::pi) + log_det_);
}

double GaussianDensity::mahalanobis_sq(const Eigen::VectorXd& c) const {
  if (c.size() != dim()) throw ContractError("feature length does not match density");
  const Eigen::VectorXd r = c - mean_;
  if (kind_ == CovarianceKind::kDiagonal) return r.cwiseAbs2().dot(inv_var_);
  return chol_lower_.triangularView<Eigen::Lower>().solve(r).squaredNorm();
}

double GaussianDensity::nll(const Eigen::VectorXd& c) const {
  return 0.5 * mahalanobis_sq(c) + normalizer();
}

Eigen::VectorXd GaussianDensity::nll_batch(const Eigen::MatrixXd& c) const {
  if (c.rows() != dim()) throw ContractError("feature length does not match density");
  const Eigen::MatrixXd r = c.colwise() - mean_;
  Eigen::VectorXd m;
  if (kind_ == CovarianceKind::kDiagonal) {
    m = (r.cwiseAbs2().transpose() * inv_var_);
  } else {
    const Eigen::MatrixXd w = chol_lower_.triangularView<Eigen::Lower>().solve(r);
    m = w.colwise().squaredNorm().transpose();
  }
  return (0.5 * m).array() + normalizer();
}

Eigen::VectorXd GaussianDensity::nll_grad(const Eigen::VectorXd& c) const {
  if (c.size() != dim()) throw ContractError("feature length does not match density");
  const Eigen::VectorXd r = c - mean_;
  if (kind_ == CovarianceKind::kDiagonal) return r.cwiseProduct(inv_var_);
  const Eigen::VectorXd w = chol_lower_.triangularView<Eigen::Lower>().solve(r);
  return chol_lower_.transpose().triangularView<Eigen::Upper>().solve(w);
}

GaussianDensity GaussianDensity::with_mean(Eigen::VectorXd mean) const {
  if (mean.size() != dim()) throw ContractError("mean length does not match density");
  GaussianDensity g = *this;
  g.mean_ = std::move(mean);
  return g;
}

Container GaussianDensity::to_container() const {
  Container c;
  c.kind = kind_ == CovarianceKind::kFull ? ModelKind::kGaussianFull : ModelKind::kGaussianDiagonal;
  c.dims = {static_cast<std::uint64_t>(dim())};
  c.arrays.emplace_back(mean_.data(), mean_.data() + mean_.size());
  if (kind_ == CovarianceKind::kFull) {
    c.arrays.emplace_back(cov_.data(), cov_.data() + cov_.size());
  } else {
    c.arrays.emplace_back(var_.data(), var_.data() + var_.size());
  }
  return c;
}

GaussianDensity GaussianDensity::from_container(const Container& c) {
  if (c.dims.size() != 1 || c.arrays.size() != 2) throw IoError("malformed density container");
  const auto d = static_cast<Eigen::Index>(c.dims[0]);
  if (static_cast<Eigen::Index>(c.arrays[0].size()) != d) throw IoError("density mean length mismatch");
  Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(c.arrays[0].data(), d);
  if (c.kind == ModelKind::kGaussianFull) {
    if (static_cast<Eigen::Index>(c.arrays[1].size()) != d * d) {
      throw IoError("density covariance length mismatch");
    }
    Eigen::MatrixXd cov = Eigen::Map<const Eigen::MatrixXd>(c.arrays[1].data(), d, d);
    return GaussianDensity(std::move(mean), std::move(cov));
  }
  if (c.kind == ModelKind::kGaussianDiagonal) {
    if (static_cast<Eigen::Index>(c.arrays[1].size()) != d) {
      throw IoError("density variance length mismatch");
    }
    Eigen::VectorXd var = Eigen::Map<const Eigen::VectorXd>(c.arrays[1].data(), d);
    return GaussianDensity(std::move(mean), std::move(var));
  }
  throw IoError(std::string("container kind '") + kind_name(c.kind) + "' is not a density");
}

GaussianDensity GaussianDensity::load(const std::filesystem::path& path) {
  return from_container(Container::load(path));
}

bool GaussianDensity::operator==(const GaussianDensity& other) const {
  return kind_ == other.kind_ && mean_ == other.mean_ && cov_ == other.cov_ && var_ == other.var_;
}

GaussianDensity fit_gaussian(const Eigen::MatrixXd& samples, CovarianceKind kind) {
  const auto d = samples.rows();
  const auto n = samples.cols();
  if (n < 2) throw FitError("gaussian fit needs at least 2 samples, got " + std::to_string(n));
  if (d == 0) throw FitError("gaussian fit on zero-dimensional features");
  Eigen::VectorXd mean = samples.rowwise().mean();
  const Eigen::MatrixXd centered = samples.colwise() - mean;
  const double inv_n = 1.0 / static_cast<double>(n);
  if (kind == CovarianceKind::kDiagonal) {
    Eigen::VectorXd var = centered.rowwise().squaredNorm() * inv_n;
    double eps = kCovarianceShrinkage * var.sum() / static_cast<double>(d);
    if (!(eps > 0.0)) eps = 1e-12;
    var.array() += eps;
    return GaussianDensity(std::move(mean), std::move(var));
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, inv_n);
  cov = cov.selfadjointView<Eigen::Lower>();
  double eps = kCovarianceShrinkage * cov.trace() / static_cast<double>(d);
  if (!(eps > 0.0)) eps = 1e-12;
  cov.diagonal().array() += eps;
  return GaussianDensity(std::move(mean), std::move(cov));
}

}  // namespace dft
