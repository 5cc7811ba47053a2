#ifndef SIXWHEEL_GRAY_IMAGE_HPP_
#define SIXWHEEL_GRAY_IMAGE_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sixwheel/errors.hpp"
#include "sixwheel/json_util.hpp"

namespace sixwheel {

/// Row-major grayscale image with real-valued intensities in [0, 255].
class GrayImage {
 public:
  static constexpr int kMinSide = 3;

  GrayImage(int width, int height, double fill = 0.0) : width_(width), height_(height) {
    if (width < kMinSide || height < kMinSide) {
      throw DimensionError("image must be at least 3x3, got " + std::to_string(width) + "x" +
                           std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  GrayImage(int width, int height, std::vector<double> data) : GrayImage(width, height) {
    if (data.size() != data_.size()) throw DimensionError("pixel count does not match width*height");
    data_ = std::move(data);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<double>& data() const { return data_; }

  double& at(int x, int y) { return data_[index(x, y)]; }
  double at(int x, int y) const { return data_[index(x, y)]; }

  /// Edge-replicated access for coordinates outside the image.
  double clamped(int x, int y) const {
    return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  GrayImage mirrored_horizontally() const {
    GrayImage out(width_, height_);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x) out.at(width_ - 1 - x, y) = at(x, y);
    return out;
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<double> data_;
};

inline unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 255.0)));
}

/// Binary PGM (P5, maxval 255).
inline std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  out.reserve(out.size() + img.data().size());
  for (double v : img.data()) out.push_back(static_cast<char>(to_byte(v)));
  return out;
}

inline GrayImage decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_space();
    const std::size_t start = pos;
    long long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000) throw ConfigError("pgm", std::string(what) + " is too large");
      ++pos;
    }
    if (pos == start) throw ConfigError("pgm", std::string("missing ") + what);
    return static_cast<int>(v);
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw ConfigError("pgm", "not a binary PGM (expected magic 'P5')");
  }
  pos = 2;
  const int width = read_int("width");
  const int height = read_int("height");
  const int maxval = read_int("maxval");
  if (maxval != 255) throw ConfigError("pgm", "only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw ConfigError("pgm", "missing whitespace after header");
  }
  ++pos;
  const std::size_t expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos < expected) throw ConfigError("pgm", "truncated pixel data");
  std::vector<double> data(expected);
  for (std::size_t i = 0; i < expected; ++i) data[i] = static_cast<unsigned char>(bytes[pos + i]);
  try {
    return GrayImage(width, height, std::move(data));
  } catch (const DimensionError& e) {
    throw ConfigError("pgm", e.what());
  }
}

inline GrayImage read_pgm(const std::filesystem::path& file) {
  return decode_pgm(json_util::read_file(file));
}

inline void write_pgm(const std::filesystem::path& file, const GrayImage& img) {
  json_util::atomic_write(file, encode_pgm(img));
}

}  // namespace sixwheel

#endif  // SIXWHEEL_GRAY_IMAGE_HPP_
