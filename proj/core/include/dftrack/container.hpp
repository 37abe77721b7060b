#pragma once

// Binary model container shared by encoders and densities.
//
// Layout (all integers and floats little-endian):
//   magic     4 bytes  "DFTK"
//   version   u32      kContainerVersion
//   kind      u32      ModelKind
//   ndims     u32      followed by ndims x u64 dimension/metadata words
//   narrays   u32      followed by, per array, a u64 length and that many f64
//
// Loaders reject unknown versions and kinds.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dft {

inline constexpr std::uint32_t kContainerVersion = 1;

enum class ModelKind : std::uint32_t {
  kRandomProjection = 1,
  kPpca = 2,
  kRae = 3,
  kGaussianFull = 16,
  kGaussianDiagonal = 17,
};

bool is_known_kind(std::uint32_t kind);
const char* kind_name(ModelKind kind);

struct Container {
  ModelKind kind = ModelKind::kRandomProjection;
  std::vector<std::uint64_t> dims;
  std::vector<std::vector<double>> arrays;

  std::vector<std::uint8_t> encode() const;
  // Throws IoError on malformed bytes, unknown version or unknown kind.
  static Container decode(std::span<const std::uint8_t> bytes);

  void save(const std::filesystem::path& path) const;
  static Container load(const std::filesystem::path& path);
};

}  // namespace dft
