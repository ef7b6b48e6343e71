#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wcedetect/errors.hpp"

namespace wcedetect {

/// Row-major 2D raster. x is the column index, y the row index, origin top-left.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;

  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    check_dims(width, height);
    values_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  Raster(int width, int height, std::vector<T> values)
      : width_(width), height_(height), values_(std::move(values)) {
    check_dims(width, height);
    if (values_.size() != static_cast<std::size_t>(width) * height) {
      throw ValidationError("Raster: value count does not match dimensions");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& operator()(int x, int y) { return values_[index(x, y)]; }
  const T& operator()(int x, int y) const { return values_[index(x, y)]; }

  /// Edge-replicating accessor.
  const T& clamped(int x, int y) const {
    return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  bool operator==(const Raster&) const = default;

 private:
  static void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
      throw ValidationError("Raster: dimensions must be at least 1x1");
    }
  }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

/// Real-valued plane: grayscale intensities, filter responses, derived channels.
using Image = Raster<double>;
using ComplexImage = Raster<std::complex<double>>;
/// Per-block 0/1 decisions, or a binary pixel mask.
using LabelGrid = Raster<std::uint8_t>;
using ProbabilityGrid = Raster<double>;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

enum class Channel { Red, Green, Blue };

/// 8-bit RGB frame stored as three planes of equal size.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height);
  Frame(Raster<std::uint8_t> red, Raster<std::uint8_t> green, Raster<std::uint8_t> blue);

  int width() const { return red_.width(); }
  int height() const { return red_.height(); }

  Rgb at(int x, int y) const { return {red_(x, y), green_(x, y), blue_(x, y)}; }
  void set(int x, int y, Rgb c) {
    red_(x, y) = c.r;
    green_(x, y) = c.g;
    blue_(x, y) = c.b;
  }

  const Raster<std::uint8_t>& plane(Channel c) const;

  bool operator==(const Frame&) const = default;

 private:
  Raster<std::uint8_t> red_;
  Raster<std::uint8_t> green_;
  Raster<std::uint8_t> blue_;
};

/// BT.601 luma, unrounded.
Image to_grayscale(const Frame& frame);
double luma(Rgb c);

/// One color plane as real values in [0,255].
Image channel_image(const Frame& frame, Channel c);

struct HsvPlanes {
  Image hue;         // degrees in [0,360)
  Image saturation;  // [0,1]
};
HsvPlanes to_hsv(const Frame& frame);
std::pair<double, double> hue_saturation(Rgb c);

template <typename T>
Raster<T> crop(const Raster<T>& image, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || width < 1 || height < 1 || x0 + width > image.width() ||
      y0 + height > image.height()) {
    throw ValidationError("crop: region outside source image");
  }
  Raster<T> out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out(x, y) = image(x0 + x, y0 + y);
  }
  return out;
}

/// Top-left offset of a centred crop; odd differences are floored.
std::pair<int, int> center_offset(int width, int height, int target_width, int target_height);

template <typename T>
Raster<T> crop_center(const Raster<T>& image, int target_width, int target_height) {
  auto [ox, oy] = center_offset(image.width(), image.height(), target_width, target_height);
  return crop(image, ox, oy, target_width, target_height);
}

Frame crop(const Frame& frame, int x0, int y0, int width, int height);
Frame crop_center(const Frame& frame, int target_width, int target_height);

template <typename Img>
struct Tile {
  int row = 0;
  int col = 0;
  Img image;
};

void check_tileable(int width, int height, int block_size);

/// Row-major block decomposition; dimensions must be divisible by block_size.
template <typename T>
std::vector<Tile<Raster<T>>> tile(const Raster<T>& image, int block_size) {
  check_tileable(image.width(), image.height(), block_size);
  std::vector<Tile<Raster<T>>> tiles;
  const int rows = image.height() / block_size;
  const int cols = image.width() / block_size;
  tiles.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      tiles.push_back({r, c, crop(image, c * block_size, r * block_size, block_size, block_size)});
    }
  }
  return tiles;
}

std::vector<Tile<Frame>> tile(const Frame& frame, int block_size);

/// Inverse of tile(); expects a complete row-major tile set of equal-size blocks.
template <typename T>
Raster<T> untile(const std::vector<Tile<Raster<T>>>& tiles, int rows, int cols) {
  if (tiles.empty() || static_cast<int>(tiles.size()) != rows * cols) {
    throw ValidationError("untile: tile count does not match grid");
  }
  const int b = tiles.front().image.width();
  Raster<T> out(cols * b, rows * b);
  for (const auto& t : tiles) {
    if (t.image.width() != b || t.image.height() != b) {
      throw ValidationError("untile: inconsistent tile size");
    }
    for (int y = 0; y < b; ++y) {
      for (int x = 0; x < b; ++x) out(t.col * b + x, t.row * b + y) = t.image(x, y);
    }
  }
  return out;
}

/// Each grid cell expanded to a block_size x block_size square.
template <typename T>
Raster<T> replicate_blocks(const Raster<T>& grid, int block_size) {
  Raster<T> out(grid.width() * block_size, grid.height() * block_size);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out(x, y) = grid(x / block_size, y / block_size);
  }
  return out;
}

/// True 2D convolution (kernel flipped), same-size output, edge replication.
/// Kernel dimensions must be odd.
template <typename K>
Raster<K> convolve2d(const Image& image, const Raster<K>& kernel);

/// Convolution with the rank-1 kernel K(u, v) = horizontal[u] * vertical[v].
template <typename K>
Raster<K> convolve_separable(const Image& image, std::span<const K> horizontal,
                             std::span<const K> vertical);

extern template Raster<double> convolve2d(const Image&, const Raster<double>&);
extern template Raster<std::complex<double>> convolve2d(const Image&,
                                                        const Raster<std::complex<double>>&);
extern template Raster<double> convolve_separable(const Image&, std::span<const double>,
                                                  std::span<const double>);
extern template Raster<std::complex<double>> convolve_separable(
    const Image&, std::span<const std::complex<double>>, std::span<const std::complex<double>>);

/// Square-window median with edge replication.
template <typename T>
Raster<T> median_filter(const Raster<T>& image, int window = 5) {
  if (window < 1 || window % 2 == 0) throw ValidationError("median_filter: window must be odd");
  if (window == 1) return image;
  const int half = window / 2;
  Raster<T> out(image.width(), image.height());
  std::vector<T> buf(static_cast<std::size_t>(window) * window);
  const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      std::size_t k = 0;
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) buf[k++] = image.clamped(x + dx, y + dy);
      }
      std::nth_element(buf.begin(), mid, buf.end());
      out(x, y) = *mid;
    }
  }
  return out;
}

struct StatSummary {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  // non-excess
  double entropy = 0.0;   // bits
};

struct ValueRange {
  double lo = 0.0;
  double hi = 255.0;
};

/// Observed [min, max] of a non-empty sample.
ValueRange value_range(std::span<const double> values);

/// Population moments plus the Shannon entropy of a 256-bin histogram over
/// `histogram_range`; values outside the range fall into the end bins.
StatSummary stats(std::span<const double> values, ValueRange histogram_range = {});

inline StatSummary stats(const Image& image, ValueRange histogram_range = {}) {
  return stats(image.values(), histogram_range);
}

}  // namespace wcedetect
