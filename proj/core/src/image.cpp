#include "dftrack/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "dftrack/error.hpp"

namespace dft {

GrayImage::GrayImage(int width, int height, float fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill) {
  if (width < 0 || height < 0) throw ContractError("negative image dimensions");
}

GrayImage::GrayImage(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw ContractError("negative image dimensions");
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw ContractError("image data length does not match width*height");
  }
  for (float v : data_) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ContractError("image value outside [0, 1]");
  }
}

BilinearSample sample_bilinear(const GrayImage& img, double u, double v) {
  const int w = img.width();
  const int h = img.height();
  BilinearSample s;
  if (w == 0 || h == 0) return s;

  bool clamp_u = false;
  bool clamp_v = false;
  if (u <= 0.0 || w == 1) {
    clamp_u = u < 0.0 || w == 1;
    u = 0.0;
  } else if (u >= w - 1) {
    clamp_u = u > w - 1;
    u = w - 1;
  }
  if (v <= 0.0 || h == 1) {
    clamp_v = v < 0.0 || h == 1;
    v = 0.0;
  } else if (v >= h - 1) {
    clamp_v = v > h - 1;
    v = h - 1;
  }

  int x0 = std::min(static_cast<int>(u), std::max(w - 2, 0));
  int y0 = std::min(static_cast<int>(v), std::max(h - 2, 0));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = u - x0;
  const double fy = v - y0;

  const double i00 = img.at(x0, y0);
  const double i10 = img.at(x1, y0);
  const double i01 = img.at(x0, y1);
  const double i11 = img.at(x1, y1);

  s.value = (1.0 - fx) * (1.0 - fy) * i00 + fx * (1.0 - fy) * i10 + (1.0 - fx) * fy * i01 +
            fx * fy * i11;
  s.du = clamp_u || w == 1 ? 0.0 : (1.0 - fy) * (i10 - i00) + fy * (i11 - i01);
  s.dv = clamp_v || h == 1 ? 0.0 : (1.0 - fx) * (i01 - i00) + fx * (i11 - i10);
  return s;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }

  [[noreturn]] void fail(const std::string& what) const {
    throw IoError("PNM parse error at byte offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int read_uint(const char* field) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) fail(std::string("truncated header reading ") + field);
    if (!std::isdigit(bytes_[pos_])) fail(std::string("expected digit for ") + field);
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 30)) fail(std::string("value too large for ") + field);
      ++pos_;
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      fail("expected single whitespace after maxval");
    }
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage decode_pnm(std::span<const std::uint8_t> bytes) {
  HeaderReader h(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    h.fail("bad magic, expected P5 or P6");
  }
  const bool color = bytes[1] == '6';
  h.skip(2);
  const int width = h.read_uint("width");
  const int height = h.read_uint("height");
  const int maxval = h.read_uint("maxval");
  if (width <= 0 || height <= 0) h.fail("non-positive dimensions");
  if (maxval <= 0 || maxval > 65535) h.fail("maxval out of range");
  h.single_whitespace();
  const std::size_t data_start = h.offset();
  const std::size_t bps = maxval > 255 ? 2 : 1;
  const std::size_t channels = color ? 3 : 1;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  const std::size_t need = n * channels * bps;
  if (bytes.size() - data_start < need) {
    throw IoError("PNM payload truncated at byte offset " + std::to_string(bytes.size()) +
                  ": expected " + std::to_string(need) + " raster bytes from offset " +
                  std::to_string(data_start));
  }

  const double scale = 1.0 / maxval;
  auto read_sample = [&](std::size_t idx) -> double {
    const std::size_t off = data_start + idx * bps;
    unsigned value = bps == 2 ? (unsigned{bytes[off]} << 8) | bytes[off + 1] : bytes[off];
    if (value > static_cast<unsigned>(maxval)) {
      throw IoError("PNM sample exceeds maxval at byte offset " + std::to_string(off));
    }
    return value * scale;
  };

  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (color) {
      const double lum = 0.299 * read_sample(3 * i) + 0.587 * read_sample(3 * i + 1) +
                         0.114 * read_sample(3 * i + 2);
      data[i] = static_cast<float>(std::clamp(lum, 0.0, 1.0));
    } else {
      data[i] = static_cast<float>(read_sample(i));
    }
  }
  return GrayImage(width, height, std::move(data));
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_pnm(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img, int maxval) {
  if (maxval != 255 && maxval != 65535) throw ContractError("PGM maxval must be 255 or 65535");
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n" + std::to_string(maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const std::size_t bps = maxval == 255 ? 1 : 2;
  out.reserve(out.size() + img.data().size() * bps);
  for (float v : img.data()) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(double{v}, 0.0, 1.0) * maxval));
    if (bps == 2) out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  return out;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path, int maxval) {
  const auto bytes = encode_pgm(img, maxval);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open image file for writing " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace dft
