#pragma once

#include <array>

#include "wcedetect/imgcore.hpp"

namespace wcedetect {

/// Moments up to order 3 of an intensity image, x = column and y = row.
struct MomentSet {
  /// raw[p][q] = sum x^p y^q f(x,y) for p + q <= 3 (other entries 0).
  std::array<std::array<double, 4>, 4> raw{};
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  /// Intensity-weighted central moments.
  std::array<std::array<double, 4>, 4> central{};
  /// central[p][q] / central[0][0]^((p+q)/2 + 1).
  std::array<std::array<double, 4>, 4> normalized{};
};

/// Throws ValidationError when the image has zero total mass.
MomentSet moment_set(const Image& image);

enum class HuVariant {
  Canonical,  // Hu's seven invariants
  Printed,    // the alternative phi5/phi7 coefficient variant, kept for comparison
};

using HuVector = std::array<double, 7>;

HuVector hu_from_normalized(const MomentSet& m, HuVariant variant = HuVariant::Canonical);
HuVector hu_moments(const Image& image, HuVariant variant = HuVariant::Canonical);

}  // namespace wcedetect
