#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "dftrack/encoder.hpp"
#include "dftrack/error.hpp"

namespace dft {

PpcaEncoder::PpcaEncoder(Eigen::MatrixXd w, Eigen::VectorXd mu, double sigma_sq)
    : w_(std::move(w)), mu_(std::move(mu)), sigma_sq_(sigma_sq) {
  if (w_.rows() != mu_.size()) throw ConfigError("ppca loading/mean dimension mismatch");
  if (!(sigma_sq_ > 0.0)) throw ConfigError("ppca residual variance must be positive");
  m_ = w_.transpose() * w_;
  m_.diagonal().array() += sigma_sq_;
  Eigen::LLT<Eigen::MatrixXd> llt(m_);
  if (llt.info() != Eigen::Success) throw ConfigError("ppca M is not positive-definite");
  projection_ = llt.solve(w_.transpose());
}

Eigen::VectorXd PpcaEncoder::encode(const Eigen::VectorXd& x) const {
  check_input(x);
  return projection_ * (x - mu_);
}

Eigen::MatrixXd PpcaEncoder::encode_batch(const Eigen::MatrixXd& x) const {
  if (x.rows() != mu_.size()) throw ContractError("ppca batch has wrong row count");
  return projection_ * (x.colwise() - mu_);
}

Eigen::VectorXd PpcaEncoder::backprop(const Eigen::VectorXd& x, const Eigen::VectorXd& dl_dc) const {
  check_input(x);
  if (dl_dc.size() != dim()) throw ContractError("ppca gradient has wrong length");
  return projection_.transpose() * dl_dc;
}

Eigen::MatrixXd PpcaEncoder::posterior_covariance() const {
  return sigma_sq_ * m_.llt().solve(Eigen::MatrixXd::Identity(m_.rows(), m_.cols()));
}

Container PpcaEncoder::to_container() const {
  Container c;
  c.kind = ModelKind::kPpca;
  c.dims = {static_cast<std::uint64_t>(w_.rows()), static_cast<std::uint64_t>(w_.cols())};
  c.arrays.emplace_back(w_.data(), w_.data() + w_.size());
  c.arrays.emplace_back(mu_.data(), mu_.data() + mu_.size());
  c.arrays.push_back({sigma_sq_});
  return c;
}

PpcaFit ppca_fit(const Eigen::MatrixXd& samples, int q) {
  const auto d = samples.rows();
  const auto n = samples.cols();
  if (q <= 0 || q >= d) throw FitError("ppca latent dim must satisfy 0 < q < input dim");
  if (n < q + 1) {
    throw FitError("ppca needs at least q+1 = " + std::to_string(q + 1) + " samples, got " +
                   std::to_string(n));
  }
  const Eigen::VectorXd mu = samples.rowwise().mean();
  const Eigen::MatrixXd centered = samples.colwise() - mu;
  // Biased (1/N) sample covariance.
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  s.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / static_cast<double>(n));
  s = s.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success) throw FitError("ppca eigendecomposition failed");
  // Eigen returns ascending order.
  const Eigen::VectorXd lambda = eig.eigenvalues().reverse();
  const Eigen::MatrixXd u = eig.eigenvectors().rowwise().reverse();

  double sigma_sq = lambda.tail(d - q).sum() / static_cast<double>(d - q);
  sigma_sq = std::max(sigma_sq, 1e-12);

  Eigen::MatrixXd w(d, q);
  for (int j = 0; j < q; ++j) {
    Eigen::VectorXd col = u.col(j);
    // Pin the eigenvector sign so the fit is reproducible.
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col[imax] < 0) col = -col;
    w.col(j) = col * std::sqrt(std::max(lambda[j] - sigma_sq, 0.0));
  }
  return {std::make_shared<PpcaEncoder>(std::move(w), mu, sigma_sq), lambda};
}

}  // namespace dft
