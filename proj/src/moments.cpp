#include "wcedetect/moments.hpp"

#include <cmath>

namespace wcedetect {

MomentSet moment_set(const Image& image) {
  MomentSet m;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double f = image(x, y);
      double xp = 1.0;
      for (int p = 0; p <= 3; ++p) {
        double yq = 1.0;
        for (int q = 0; p + q <= 3; ++q) {
          m.raw[p][q] += xp * yq * f;
          yq *= y;
        }
        xp *= x;
      }
    }
  }
  const double mass = m.raw[0][0];
  if (!(mass > 0.0)) throw ValidationError("moment_set: image has no positive mass");
  m.centroid_x = m.raw[1][0] / mass;
  m.centroid_y = m.raw[0][1] / mass;

  // Second pass about the centroid; better conditioned than expanding raw moments.
  for (int y = 0; y < image.height(); ++y) {
    const double dy = y - m.centroid_y;
    for (int x = 0; x < image.width(); ++x) {
      const double f = image(x, y);
      if (f == 0.0) continue;
      const double dx = x - m.centroid_x;
      double xp = 1.0;
      for (int p = 0; p <= 3; ++p) {
        double yq = 1.0;
        for (int q = 0; p + q <= 3; ++q) {
          m.central[p][q] += xp * yq * f;
          yq *= dy;
        }
        xp *= dx;
      }
    }
  }

  const double mu00 = m.central[0][0];
  for (int p = 0; p <= 3; ++p) {
    for (int q = 0; p + q <= 3; ++q) {
      const double gamma = (p + q) / 2.0 + 1.0;
      m.normalized[p][q] = m.central[p][q] / std::pow(mu00, gamma);
    }
  }
  return m;
}

HuVector hu_from_normalized(const MomentSet& m, HuVariant variant) {
  const auto& t = m.normalized;
  const double n20 = t[2][0], n02 = t[0][2], n11 = t[1][1];
  const double n30 = t[3][0], n03 = t[0][3], n21 = t[2][1], n12 = t[1][2];

  const double a = n30 + n12;  // tau30 + tau12
  const double b = n21 + n03;  // tau21 + tau03
  HuVector phi{};
  phi[0] = n20 + n02;
  phi[1] = (n20 - n02) * (n20 - n02) + 4.0 * n11 * n11;
  phi[2] = (n30 - 3.0 * n12) * (n30 - 3.0 * n12) + (n03 - 3.0 * n21) * (n03 - 3.0 * n21);
  phi[3] = a * a + b * b;
  phi[5] = (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b;

  if (variant == HuVariant::Canonical) {
    phi[4] = (n30 - 3.0 * n12) * a * (a * a - 3.0 * b * b) +
             (3.0 * n21 - n03) * b * (3.0 * a * a - b * b);
    phi[6] = (3.0 * n21 - n03) * a * (a * a - 3.0 * b * b) -
             (n30 - 3.0 * n12) * b * (3.0 * a * a - b * b);
  } else {
    phi[4] = (3.0 * n30 - 3.0 * n12) * a * (a * a - 3.0 * b * b) +
             (3.0 * n21 - 3.0 * n03) * b * (3.0 * a * a - b * b);
    phi[6] = (3.0 * n21 - n03) * a * (a * a - 3.0 * b * b) +
             (3.0 * n21 - 3.0 * n03) * b * (3.0 * a * a - b * b);
  }
  return phi;
}

HuVector hu_moments(const Image& image, HuVariant variant) {
  return hu_from_normalized(moment_set(image), variant);
}

}  // namespace wcedetect
