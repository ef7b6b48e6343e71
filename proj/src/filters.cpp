#include "wcedetect/filters.hpp"

#include <cmath>
#include <array>
#include <numbers>
#include <sstream>

namespace wcedetect {
namespace {

constexpr std::array<double, 2> kFrequencies = {0.5, 1.5};
constexpr std::array<int, 4> kAngles = {0, 45, 90, 135};
constexpr std::array<int, 3> kRangesMethod1 = {10, 20, 40};
constexpr int kRangeMethod2 = 10;
constexpr double kSigma = 0.5;

// Exact values on the axes so that theta = 90 is a pure axis swap.
std::pair<double, double> cos_sin_deg(double deg) {
  const double r = std::fmod(deg, 360.0);
  if (r == 0.0) return {1.0, 0.0};
  if (r == 90.0) return {0.0, 1.0};
  if (r == 180.0) return {-1.0, 0.0};
  if (r == 270.0) return {0.0, -1.0};
  const double rad = deg * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string response_label(double f, int theta, int range) {
  return "f" + format_number(f) + "_t" + std::to_string(theta) + "_r" + std::to_string(range);
}

std::string mean_label(double f, int range) {
  return "f" + format_number(f) + "_r" + std::to_string(range) + "_mean";
}

Image pixel_mean(const std::vector<const Image*>& members) {
  Image out(members.front()->width(), members.front()->height());
  const double n = static_cast<double>(members.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (const Image* m : members) acc += m->values()[i];
    out.values()[i] = acc / n;
  }
  return out;
}

// Responses for every (f, theta) at the given ranges; orientation means appended per (f, range).
std::vector<GaborImage> run_bank(const Image& image, GaborCoordinates coords,
                                 std::span<const int> ranges) {
  std::vector<GaborImage> oriented;
  for (double f : kFrequencies) {
    for (int range : ranges) {
      for (int theta : kAngles) {
        GaborParams p;
        p.frequency = f;
        p.theta_deg = theta;
        p.sigma_x = p.sigma_y = kSigma;
        p.range = range;
        p.coords = coords;
        oriented.push_back({response_label(f, theta, range), gabor_response(image, p)});
      }
    }
  }
  std::vector<GaborImage> out = oriented;
  for (std::size_t g = 0; g < oriented.size(); g += kAngles.size()) {
    std::vector<const Image*> members;
    for (std::size_t k = 0; k < kAngles.size(); ++k) members.push_back(&oriented[g + k].image);
    const std::size_t fi = g / (kAngles.size() * ranges.size());
    const std::size_t ri = (g / kAngles.size()) % ranges.size();
    out.push_back({mean_label(kFrequencies[fi], ranges[ri]), pixel_mean(members)});
  }
  return out;
}

std::vector<std::string> bank_labels(std::span<const int> ranges) {
  std::vector<std::string> out;
  for (double f : kFrequencies) {
    for (int range : ranges) {
      for (int theta : kAngles) out.push_back(response_label(f, theta, range));
    }
  }
  for (double f : kFrequencies) {
    for (int range : ranges) out.push_back(mean_label(f, range));
  }
  return out;
}

}  // namespace

void GaborParams::validate() const {
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) throw ValidationError("GaborParams: sigma must be > 0");
  if (range < 1) throw ValidationError("GaborParams: range must be >= 1");
}

double gabor_coordinate(int i, int support, GaborCoordinates coords) {
  const double half = (support - 1) / 2.0;
  if (coords == GaborCoordinates::Pixel) return i - half;
  return half == 0.0 ? 0.0 : (i - half) / half;
}

ComplexImage gabor_kernel(const GaborParams& p) {
  p.validate();
  const int n = p.support();
  const auto [c, s] = cos_sin_deg(p.theta_deg);
  const double scale = 1.0 / (2.0 * std::numbers::pi * p.sigma_x * p.sigma_y);
  ComplexImage k(n, n);
  for (int v = 0; v < n; ++v) {
    const double y = gabor_coordinate(v, n, p.coords);
    for (int u = 0; u < n; ++u) {
      const double x = gabor_coordinate(u, n, p.coords);
      const double X = x * c + y * s;
      const double Y = -x * s + y * c;
      const double envelope =
          std::exp(-(X * X / (2.0 * p.sigma_x * p.sigma_x) + Y * Y / (2.0 * p.sigma_y * p.sigma_y)));
      k(u, v) = scale * envelope * std::polar(1.0, 2.0 * std::numbers::pi * p.frequency * X + p.phase);
    }
  }
  return k;
}

Image gabor_response(const Image& image, const GaborParams& p, bool allow_separable) {
  const ComplexImage kernel = gabor_kernel(p);
  double l1 = 0.0;
  for (const auto& v : kernel.values()) l1 += std::abs(v);

  ComplexImage response;
  if (allow_separable && p.sigma_x == p.sigma_y) {
    // exp(-(X^2+Y^2)/2s^2) = exp(-(x^2+y^2)/2s^2) and the carrier factors along x and y.
    const int n = p.support();
    const auto [c, s] = cos_sin_deg(p.theta_deg);
    const double w = 2.0 * std::numbers::pi * p.frequency;
    const double scale = 1.0 / (2.0 * std::numbers::pi * p.sigma_x * p.sigma_y);
    std::vector<std::complex<double>> horizontal(n), vertical(n);
    for (int i = 0; i < n; ++i) {
      const double t = gabor_coordinate(i, n, p.coords);
      const double g = std::exp(-t * t / (2.0 * p.sigma_x * p.sigma_x));
      horizontal[i] = g * std::polar(1.0, w * c * t);
      vertical[i] = scale * g * std::polar(1.0, w * s * t + p.phase);
    }
    response = convolve_separable<std::complex<double>>(image, horizontal, vertical);
  } else {
    response = convolve2d(image, kernel);
  }

  Image out(image.width(), image.height());
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = std::abs(response.values()[i]) / l1;
  return out;
}

std::vector<std::string> gabor_bank_method1_labels() { return bank_labels(kRangesMethod1); }

std::vector<std::string> gabor_bank_method2_labels() {
  const std::array<int, 1> ranges = {kRangeMethod2};
  return bank_labels(ranges);
}

std::vector<GaborImage> gabor_bank_method1(const Image& image, GaborCoordinates coords) {
  return run_bank(image, coords, kRangesMethod1);
}

std::vector<GaborImage> gabor_bank_method2(const Image& image, GaborCoordinates coords) {
  const std::array<int, 1> ranges = {kRangeMethod2};
  return run_bank(image, coords, ranges);
}

const std::vector<std::pair<std::string, std::vector<double>>>& laws_kernels_1d(int tap) {
  static const std::vector<std::pair<std::string, std::vector<double>>> five = {
      {"L5", {1, 4, 6, 4, 1}},
      {"E5", {-1, -2, 0, 2, 1}},
      {"S5", {-1, 0, 2, 0, -1}},
      {"W5", {-1, 2, 0, -2, 1}},
      {"R5", {1, -4, 6, -4, 1}},
  };
  static const std::vector<std::pair<std::string, std::vector<double>>> seven = {
      {"L7", {1, 6, 15, 20, 15, 6, 1}},
      {"E7", {-1, -4, -5, 0, 5, 4, 1}},
      {"S7", {-1, -2, 1, 4, 1, -2, -1}},
      {"W7", {-1, 0, 3, 0, -3, 0, 1}},
      {"R7", {1, -2, -1, 4, -1, -2, 1}},
      {"O7", {-1, 6, -15, 20, -15, 6, -1}},
  };
  if (tap == 5) return five;
  if (tap == 7) return seven;
  throw ValidationError("laws: tap must be 5 or 7, got " + std::to_string(tap));
}

namespace {

std::vector<LawsMask> build_masks(int tap) {
  const auto& base = laws_kernels_1d(tap);
  std::vector<LawsMask> masks;
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t j = i; j < base.size(); ++j) {
      const auto& a = base[i].second;
      const auto& b = base[j].second;
      Image k(tap, tap);
      for (int r = 0; r < tap; ++r) {
        for (int c = 0; c < tap; ++c) k(c, r) = 0.5 * (a[r] * b[c] + b[r] * a[c]);
      }
      masks.push_back({base[i].first + base[j].first, std::move(k)});
    }
  }
  return masks;
}

}  // namespace

const std::vector<LawsMask>& laws_masks(int tap) {
  static const std::vector<LawsMask> five = build_masks(5);
  static const std::vector<LawsMask> seven = build_masks(7);
  if (tap == 5) return five;
  if (tap == 7) return seven;
  throw ValidationError("laws: tap must be 5 or 7, got " + std::to_string(tap));
}

std::vector<double> laws_features(const Image& image, int tap) {
  const auto& base = laws_kernels_1d(tap);
  std::vector<double> out;
  out.reserve(laws_masks(tap).size() * 5);
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t j = i; j < base.size(); ++j) {
      // Each mask has rank <= 2: (a'b + b'a)/2 is the mean of two separable passes.
      const std::vector<double>& a = base[i].second;
      const std::vector<double>& b = base[j].second;
      Image response = convolve_separable<double>(image, b, a);
      if (i != j) {
        const Image other = convolve_separable<double>(image, a, b);
        for (std::size_t k = 0; k < response.size(); ++k) {
          response.values()[k] = 0.5 * (response.values()[k] + other.values()[k]);
        }
      }
      const StatSummary s = stats(response, value_range(response.values()));
      out.insert(out.end(), {s.mean, s.variance, s.skewness, s.kurtosis, s.entropy});
    }
  }
  return out;
}

}  // namespace wcedetect
