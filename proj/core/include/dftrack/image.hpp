#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dft {

// Row-major gray image with values in [0, 1]. Stored in single precision;
// sampling arithmetic is carried out in double.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, float fill = 0.0f);
  // Throws ContractError if data.size() != width * height or a value falls
  // outside [0, 1].
  GrayImage(int width, int height, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  float at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  float& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

struct BilinearSample {
  double value = 0.0;
  double du = 0.0;
  double dv = 0.0;
};

// Bilinear interpolation at continuous pixel coordinate (u, v), where u is
// the column and v the row. Coordinates outside [0, w-1] x [0, h-1] are
// clamped to the border and the derivative along the clamped axis is zero.
BilinearSample sample_bilinear(const GrayImage& img, double u, double v);

// Binary PGM (P5). Binary PPM (P6) is accepted on read and converted to
// gray with luminance weights (0.299, 0.587, 0.114). Comment lines in the
// header are skipped. Errors raise IoError naming the byte offset.
GrayImage read_pgm(const std::filesystem::path& path);
GrayImage decode_pnm(std::span<const std::uint8_t> bytes);

// maxval must be 255 or 65535.
void write_pgm(const GrayImage& img, const std::filesystem::path& path, int maxval = 255);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img, int maxval = 255);

}  // namespace dft
