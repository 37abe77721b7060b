#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace dft {

// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path& path);

// Digest over every regular file below root: sorted relative paths with
// their content digests. Files named in `skip` (relative, generic form) are
// left out.
std::string sha256_tree(const std::filesystem::path& root,
                        std::span<const std::string> skip = {});

}  // namespace dft
