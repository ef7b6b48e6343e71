#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "wcedetect/imgcore.hpp"

namespace wcedetect {

struct GlcmConfig {
  int levels = 16;
  int angle = 0;  // degrees: 0, 45, 90 or 135
  int distance = 1;
  bool symmetric = true;

  void validate() const;
};

/// (dcol, drow) pixel offset for an angle/distance pair. Rows grow downward, so
/// 45 degrees points up and to the right.
std::pair<int, int> glcm_offset(int angle, int distance);

/// Uniform quantization of [0,255] into `levels` bins; out-of-range values clamp.
int quantize_level(double value, int levels);

/// Normalized co-occurrence distribution; entries sum to 1.
class GlcmMatrix {
 public:
  GlcmMatrix(int levels, std::vector<double> probabilities);

  int levels() const { return levels_; }
  double operator()(int i, int j) const { return p_[static_cast<std::size_t>(i) * levels_ + j]; }
  std::span<const double> values() const { return p_; }

 private:
  int levels_;
  std::vector<double> p_;
};

GlcmMatrix compute_glcm(const Image& image, const GlcmConfig& config = {});

inline constexpr std::size_t kGlcmFeatureCount = 22;

/// Feature order of glcm_features().
const std::array<std::string_view, kGlcmFeatureCount>& glcm_feature_names();

struct GlcmFeatures {
  std::array<double, kGlcmFeatureCount> values{};
  /// False when the power iteration for the maximum correlation coefficient hit
  /// its iteration cap; that feature is then reported as 0.
  bool mcc_converged = true;
};

/// Haralick's fourteen statistics followed by the Soh/Clausi additions.
GlcmFeatures glcm_features(const GlcmMatrix& m);

struct MccResult {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
};

/// Square root of the second-largest eigenvalue of Haralick's Q matrix, found by
/// power iteration after deflating the known unit eigenpair. The iteration matrix is
/// squared every few steps so near-tied eigenvalues still separate within the cap.
MccResult max_correlation_coefficient(const GlcmMatrix& m);

/// Number of glcm_features() calls in this process whose MCC iteration did not converge.
std::size_t mcc_failure_count();

}  // namespace wcedetect
