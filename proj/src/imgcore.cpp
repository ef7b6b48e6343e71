#include "wcedetect/imgcore.hpp"

#include <array>
#include <cmath>

namespace wcedetect {

Frame::Frame(int width, int height) : red_(width, height), green_(width, height), blue_(width, height) {}

Frame::Frame(Raster<std::uint8_t> red, Raster<std::uint8_t> green, Raster<std::uint8_t> blue)
    : red_(std::move(red)), green_(std::move(green)), blue_(std::move(blue)) {
  if (red_.width() != green_.width() || red_.width() != blue_.width() ||
      red_.height() != green_.height() || red_.height() != blue_.height()) {
    throw ValidationError("Frame: channel planes differ in size");
  }
  if (red_.empty()) throw ValidationError("Frame: empty planes");
}

const Raster<std::uint8_t>& Frame::plane(Channel c) const {
  switch (c) {
    case Channel::Red: return red_;
    case Channel::Green: return green_;
    case Channel::Blue: return blue_;
  }
  return red_;
}

double luma(Rgb c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

Image to_grayscale(const Frame& frame) {
  Image out(frame.width(), frame.height());
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) out(x, y) = luma(frame.at(x, y));
  }
  return out;
}

Image channel_image(const Frame& frame, Channel c) {
  const auto& p = frame.plane(c);
  Image out(p.width(), p.height());
  auto dst = out.values();
  auto src = p.values();
  std::transform(src.begin(), src.end(), dst.begin(), [](std::uint8_t v) { return double(v); });
  return out;
}

std::pair<double, double> hue_saturation(Rgb c) {
  const double r = c.r, g = c.g, b = c.b;
  const double hi = std::max({r, g, b});
  const double lo = std::min({r, g, b});
  const double chroma = hi - lo;
  if (chroma == 0.0) return {0.0, 0.0};
  double h = 0.0;
  if (hi == r) {
    h = 60.0 * std::fmod((g - b) / chroma, 6.0);
  } else if (hi == g) {
    h = 60.0 * ((b - r) / chroma + 2.0);
  } else {
    h = 60.0 * ((r - g) / chroma + 4.0);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return {h, chroma / hi};
}

HsvPlanes to_hsv(const Frame& frame) {
  HsvPlanes out{Image(frame.width(), frame.height()), Image(frame.width(), frame.height())};
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      auto [h, s] = hue_saturation(frame.at(x, y));
      out.hue(x, y) = h;
      out.saturation(x, y) = s;
    }
  }
  return out;
}

std::pair<int, int> center_offset(int width, int height, int target_width, int target_height) {
  if (target_width < 1 || target_height < 1) throw ValidationError("crop_center: empty target");
  if (target_width > width || target_height > height) {
    throw ValidationError("crop_center: target larger than source (" + std::to_string(width) + "x" +
                          std::to_string(height) + ")");
  }
  return {(width - target_width) / 2, (height - target_height) / 2};
}

Frame crop(const Frame& frame, int x0, int y0, int width, int height) {
  return Frame(crop(frame.plane(Channel::Red), x0, y0, width, height),
               crop(frame.plane(Channel::Green), x0, y0, width, height),
               crop(frame.plane(Channel::Blue), x0, y0, width, height));
}

Frame crop_center(const Frame& frame, int target_width, int target_height) {
  auto [ox, oy] = center_offset(frame.width(), frame.height(), target_width, target_height);
  return crop(frame, ox, oy, target_width, target_height);
}

void check_tileable(int width, int height, int block_size) {
  if (block_size < 1 || width % block_size != 0 || height % block_size != 0) {
    throw ValidationError("tile: " + std::to_string(width) + "x" + std::to_string(height) +
                          " is not divisible by block size " + std::to_string(block_size));
  }
}

std::vector<Tile<Frame>> tile(const Frame& frame, int block_size) {
  check_tileable(frame.width(), frame.height(), block_size);
  std::vector<Tile<Frame>> tiles;
  const int rows = frame.height() / block_size;
  const int cols = frame.width() / block_size;
  tiles.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      tiles.push_back({r, c, crop(frame, c * block_size, r * block_size, block_size, block_size)});
    }
  }
  return tiles;
}

namespace {

// Image padded by edge replication, so every kernel tap indexes in range.
struct Padded {
  int width;
  int height;
  std::vector<double> values;

  Padded(const Image& image, int pad_x, int pad_y)
      : width(image.width() + 2 * pad_x), height(image.height() + 2 * pad_y) {
    values.resize(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        values[static_cast<std::size_t>(y) * width + x] = image.clamped(x - pad_x, y - pad_y);
      }
    }
  }
};

void check_odd_kernel(int width, int height) {
  if (width % 2 == 0 || height % 2 == 0) {
    throw ValidationError("convolve: kernel dimensions must be odd");
  }
}

}  // namespace

template <typename K>
Raster<K> convolve2d(const Image& image, const Raster<K>& kernel) {
  check_odd_kernel(kernel.width(), kernel.height());
  const int kw = kernel.width();
  const int kh = kernel.height();
  const Padded src(image, kw / 2, kh / 2);

  // Flip once, then correlate against the padded source.
  std::vector<K> flipped(kernel.size());
  for (int v = 0; v < kh; ++v) {
    for (int u = 0; u < kw; ++u) {
      flipped[static_cast<std::size_t>(v) * kw + u] = kernel(kw - 1 - u, kh - 1 - v);
    }
  }

  Raster<K> out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      K acc{};
      for (int v = 0; v < kh; ++v) {
        const double* row = &src.values[static_cast<std::size_t>(y + v) * src.width + x];
        const K* krow = &flipped[static_cast<std::size_t>(v) * kw];
        for (int u = 0; u < kw; ++u) acc += krow[u] * row[u];
      }
      out(x, y) = acc;
    }
  }
  return out;
}

template <typename K>
Raster<K> convolve_separable(const Image& image, std::span<const K> horizontal,
                             std::span<const K> vertical) {
  const int kw = static_cast<int>(horizontal.size());
  const int kh = static_cast<int>(vertical.size());
  check_odd_kernel(kw, kh);
  const int w = image.width();
  const int h = image.height();
  const int cx = kw / 2;
  const int cy = kh / 2;

  // Horizontal pass over edge-replicated rows.
  std::vector<K> tmp(static_cast<std::size_t>(w) * h);
  std::vector<double> row(static_cast<std::size_t>(w + kw - 1));
  for (int y = 0; y < h; ++y) {
    for (int i = 0; i < w + kw - 1; ++i) row[i] = image.clamped(i - cx, y);
    for (int x = 0; x < w; ++x) {
      K acc{};
      for (int u = 0; u < kw; ++u) acc += horizontal[kw - 1 - u] * row[x + u];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }

  Raster<K> out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      K acc{};
      for (int v = 0; v < kh; ++v) {
        const int sy = std::clamp(y + cy - v, 0, h - 1);
        acc += vertical[v] * tmp[static_cast<std::size_t>(sy) * w + x];
      }
      out(x, y) = acc;
    }
  }
  return out;
}

template Raster<double> convolve2d(const Image&, const Raster<double>&);
template Raster<std::complex<double>> convolve2d(const Image&, const Raster<std::complex<double>>&);
template Raster<double> convolve_separable(const Image&, std::span<const double>,
                                           std::span<const double>);
template Raster<std::complex<double>> convolve_separable(const Image&,
                                                         std::span<const std::complex<double>>,
                                                         std::span<const std::complex<double>>);

ValueRange value_range(std::span<const double> values) {
  if (values.empty()) throw ValidationError("value_range: empty input");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

StatSummary stats(std::span<const double> values, ValueRange histogram_range) {
  if (values.empty()) throw ValidationError("stats: empty input");
  const double n = static_cast<double>(values.size());
  StatSummary s;

  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;

  const auto [lo, hi] = value_range(values);
  if (lo != hi) {
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
      const double d = v - s.mean;
      const double d2 = d * d;
      m2 += d2;
      m3 += d2 * d;
      m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.variance = m2;
    if (m2 > 0.0) {
      s.skewness = m3 / std::pow(m2, 1.5);
      s.kurtosis = m4 / (m2 * m2);
    }
  }

  std::array<std::size_t, 256> hist{};
  const double span = histogram_range.hi - histogram_range.lo;
  for (double v : values) {
    int bin = 0;
    if (span > 0.0) {
      const double t = std::floor((v - histogram_range.lo) / span * 256.0);
      bin = static_cast<int>(std::clamp(t, 0.0, 255.0));
    }
    ++hist[bin];
  }
  for (std::size_t c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    s.entropy -= p * std::log2(p);
  }
  return s;
}

}  // namespace wcedetect
