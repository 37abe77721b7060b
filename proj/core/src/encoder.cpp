#include "dftrack/encoder.hpp"

#include "dftrack/error.hpp"
#include "dftrack/rae.hpp"

namespace dft {

const char* encoder_kind_name(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kRandomProjection: return "rp";
    case EncoderKind::kPpca: return "ppca";
    case EncoderKind::kRae: return "rae";
  }
  return "unknown";
}

EncoderKind parse_encoder_kind(const std::string& name) {
  if (name == "rp") return EncoderKind::kRandomProjection;
  if (name == "ppca") return EncoderKind::kPpca;
  if (name == "rae") return EncoderKind::kRae;
  throw ConfigError("unknown encoder kind '" + name + "' (expected rp, ppca or rae)");
}

Eigen::MatrixXd Encoder::encode_batch(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out(dim(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = encode(x.col(j));
  return out;
}

void Encoder::check_input(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim()) {
    throw ContractError("encoder input length " + std::to_string(x.size()) + " != " +
                        std::to_string(input_dim()));
  }
}

std::shared_ptr<const Encoder> encoder_from_container(const Container& c) {
  switch (c.kind) {
    case ModelKind::kRandomProjection: {
      if (c.dims.size() != 3 || c.arrays.size() != 1) throw IoError("malformed rp container");
      const auto n = static_cast<Eigen::Index>(c.dims[0]);
      const auto k = static_cast<Eigen::Index>(c.dims[1]);
      if (static_cast<Eigen::Index>(c.arrays[0].size()) != n * k) {
        throw IoError("rp container weight length mismatch");
      }
      Eigen::MatrixXd a = Eigen::Map<const Eigen::MatrixXd>(c.arrays[0].data(), n, k);
      return std::make_shared<RandomProjectionEncoder>(std::move(a), c.dims[2]);
    }
    case ModelKind::kPpca: {
      if (c.dims.size() != 2 || c.arrays.size() != 3) throw IoError("malformed ppca container");
      const auto n = static_cast<Eigen::Index>(c.dims[0]);
      const auto q = static_cast<Eigen::Index>(c.dims[1]);
      if (static_cast<Eigen::Index>(c.arrays[0].size()) != n * q ||
          static_cast<Eigen::Index>(c.arrays[1].size()) != n || c.arrays[2].size() != 1) {
        throw IoError("ppca container array length mismatch");
      }
      Eigen::MatrixXd w = Eigen::Map<const Eigen::MatrixXd>(c.arrays[0].data(), n, q);
      Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(c.arrays[1].data(), n);
      return std::make_shared<PpcaEncoder>(std::move(w), std::move(mu), c.arrays[2][0]);
    }
    case ModelKind::kRae:
      return std::make_shared<RaeEncoder>(RaeModel::from_container(c));
    default:
      throw IoError(std::string("container kind '") + kind_name(c.kind) + "' is not an encoder");
  }
}

std::shared_ptr<const Encoder> load_encoder(const std::filesystem::path& path) {
  return encoder_from_container(Container::load(path));
}

}  // namespace dft
