#include "dftrack/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "dftrack/error.hpp"

namespace dft {
namespace {

constexpr char kMagic[4] = {'D', 'F', 'T', 'K'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw IoError(std::string("model container truncated reading ") + what + " at byte offset " +
                    std::to_string(pos_));
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= U{bytes_[pos_ + i]} << (8 * i);
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_known_kind(std::uint32_t kind) {
  switch (static_cast<ModelKind>(kind)) {
    case ModelKind::kRandomProjection:
    case ModelKind::kPpca:
    case ModelKind::kRae:
    case ModelKind::kGaussianFull:
    case ModelKind::kGaussianDiagonal:
      return true;
  }
  return false;
}

const char* kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kRandomProjection: return "rp";
    case ModelKind::kPpca: return "ppca";
    case ModelKind::kRae: return "rae";
    case ModelKind::kGaussianFull: return "gaussian-full";
    case ModelKind::kGaussianDiagonal: return "gaussian-diagonal";
  }
  return "unknown";
}

std::vector<std::uint8_t> Container::encode() const {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le(out, kContainerVersion);
  put_le(out, static_cast<std::uint32_t>(kind));
  put_le(out, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put_le(out, d);
  put_le(out, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    put_le(out, static_cast<std::uint64_t>(a.size()));
    for (double v : a) put_le(out, v);
  }
  return out;
}

Container Container::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("not a model container (bad magic at byte offset 0)");
  }
  Reader r(bytes.subspan(4));
  const auto version = r.get<std::uint32_t>("version");
  if (version != kContainerVersion) {
    throw IoError("unsupported model container version " + std::to_string(version));
  }
  const auto kind = r.get<std::uint32_t>("kind");
  if (!is_known_kind(kind)) throw IoError("unknown model kind tag " + std::to_string(kind));
  Container c;
  c.kind = static_cast<ModelKind>(kind);
  const auto ndims = r.get<std::uint32_t>("dimension count");
  if (ndims > r.remaining() / 8) throw IoError("model container dimension count too large");
  c.dims.resize(ndims);
  for (auto& d : c.dims) d = r.get<std::uint64_t>("dimension");
  const auto narrays = r.get<std::uint32_t>("array count");
  if (narrays > r.remaining() / 8) throw IoError("model container array count too large");
  c.arrays.resize(narrays);
  for (auto& a : c.arrays) {
    const auto len = r.get<std::uint64_t>("array length");
    if (len > r.remaining() / 8) {
      throw IoError("model container array truncated at byte offset " +
                    std::to_string(4 + r.offset()));
    }
    a.resize(len);
    for (auto& v : a) v = r.get<double>("array value");
  }
  if (r.remaining() != 0) throw IoError("trailing bytes after model container");
  return c;
}

void Container::save(const std::filesystem::path& path) const {
  const auto bytes = encode();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

Container Container::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace dft
