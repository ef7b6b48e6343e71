#pragma once

#include <string>
#include <vector>

#include "wcedetect/imgcore.hpp"

namespace wcedetect {

/// How kernel sample positions are expressed. Normalized maps the support onto
/// [-1,1] in both axes, so sigma and frequency are relative to the kernel size.
enum class GaborCoordinates { Normalized, Pixel };

struct GaborParams {
  double frequency = 0.5;  // cycles per coordinate unit
  double theta_deg = 0.0;
  double phase = 0.0;  // radians
  double sigma_x = 0.5;
  double sigma_y = 0.5;
  int range = 11;  // kernel support in pixels; even values are bumped to the next odd
  GaborCoordinates coords = GaborCoordinates::Normalized;

  int support() const { return range % 2 == 0 ? range + 1 : range; }
  void validate() const;
};

/// Complex impulse response sampled on a support x support grid; kernel(u, v) has
/// u as the column (x) and v as the row (y).
ComplexImage gabor_kernel(const GaborParams& p);

/// Sample coordinate of kernel index `i` along one axis.
double gabor_coordinate(int i, int support, GaborCoordinates coords);

/// |image * kernel| / sum|kernel|, so a [0,255] input stays within [0,255].
/// Isotropic envelopes are filtered separably; `allow_separable = false` forces
/// the direct 2D path.
Image gabor_response(const Image& image, const GaborParams& p, bool allow_separable = true);

struct GaborImage {
  std::string label;
  Image image;
};

/// Names of the bank images, in output order, without computing them.
std::vector<std::string> gabor_bank_method1_labels();
std::vector<std::string> gabor_bank_method2_labels();

/// 24 responses (f in {0.5,1.5}, range in {10,20,40}, theta in {0,45,90,135}),
/// then the 6 orientation means per (f, range).
std::vector<GaborImage> gabor_bank_method1(const Image& image,
                                           GaborCoordinates coords = GaborCoordinates::Normalized);

/// 8 responses (f in {0.5,1.5}, theta in {0,45,90,135}, range 10), then 2 per-frequency means.
std::vector<GaborImage> gabor_bank_method2(const Image& image,
                                           GaborCoordinates coords = GaborCoordinates::Normalized);

struct LawsMask {
  std::string name;  // e.g. "L5E5"
  Image kernel;
};

/// 1D Laws kernels: L5 E5 S5 W5 R5 for tap 5; L7 E7 S7 W7 R7 O7 for tap 7.
const std::vector<std::pair<std::string, std::vector<double>>>& laws_kernels_1d(int tap);

/// a'a for every base kernel and (a'b + b'a)/2 for every unordered pair: 15 masks
/// for tap 5, 21 for tap 7.
const std::vector<LawsMask>& laws_masks(int tap);

/// [mean, variance, skewness, kurtosis, entropy] of each mask response, in mask order.
/// Entropy bins span each response's own value range.
std::vector<double> laws_features(const Image& image, int tap);

}  // namespace wcedetect
