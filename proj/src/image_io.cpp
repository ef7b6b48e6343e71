#include "wcedetect/image_io.hpp"

#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace wcedetect {
namespace {

cv::Mat load(const std::filesystem::path& path, int flags) {
  if (!std::filesystem::exists(path)) throw DataError("missing image file: " + path.string());
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) throw DataError("cannot decode image: " + path.string());
  return m;
}

void store(const std::filesystem::path& path, const cv::Mat& m) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), m);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw DataError("cannot write image: " + path.string());
}

cv::Mat to_mat(const Raster<std::uint8_t>& plane) {
  cv::Mat m(plane.height(), plane.width(), CV_8UC1);
  for (int y = 0; y < plane.height(); ++y) {
    auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < plane.width(); ++x) row[x] = plane(x, y);
  }
  return m;
}

Raster<std::uint8_t> from_mat(const cv::Mat& m) {
  Raster<std::uint8_t> plane(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) plane(x, y) = row[x];
  }
  return plane;
}

}  // namespace

Frame read_frame(const std::filesystem::path& path) {
  cv::Mat bgr = load(path, cv::IMREAD_COLOR);
  Frame frame(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) frame.set(x, y, {row[x][2], row[x][1], row[x][0]});
  }
  return frame;
}

void write_frame(const std::filesystem::path& path, const Frame& frame) {
  cv::Mat bgr(frame.height(), frame.width(), CV_8UC3);
  for (int y = 0; y < frame.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < frame.width(); ++x) {
      const Rgb c = frame.at(x, y);
      row[x] = cv::Vec3b(c.b, c.g, c.r);
    }
  }
  store(path, bgr);
}

void write_gray(const std::filesystem::path& path, const Image& image) {
  Raster<std::uint8_t> plane(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      plane(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(image(x, y)), 0L, 255L));
    }
  }
  store(path, to_mat(plane));
}

Image read_gray(const std::filesystem::path& path) {
  const auto plane = from_mat(load(path, cv::IMREAD_GRAYSCALE));
  Image out(plane.width(), plane.height());
  for (std::size_t i = 0; i < plane.size(); ++i) out.values()[i] = plane.values()[i];
  return out;
}

void write_mask(const std::filesystem::path& path, const LabelGrid& mask) {
  Raster<std::uint8_t> plane(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) plane.values()[i] = mask.values()[i] ? 255 : 0;
  store(path, to_mat(plane));
}

LabelGrid read_mask(const std::filesystem::path& path) {
  auto plane = from_mat(load(path, cv::IMREAD_GRAYSCALE));
  for (auto& v : plane.values()) v = v ? 1 : 0;
  return plane;
}

}  // namespace wcedetect
