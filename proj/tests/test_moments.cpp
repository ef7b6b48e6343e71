#include <doctest.h>

#include "oracles.hpp"
#include "wcedetect/moments.hpp"

using namespace wcedetect;

namespace {

Image rotate90(const Image& img) {
  Image out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(img.height() - 1 - y, x) = img(x, y);
  return out;
}

Image mirror(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(img.width() - 1 - x, y) = img(x, y);
  return out;
}

Image upscale2(const Image& img) {
  Image out(img.width() * 2, img.height() * 2);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out(x, y) = img(x / 2, y / 2);
  return out;
}

// A random patch inside a zero canvas, so it can be translated without clipping.
Image patch_in_canvas(const Image& patch, int size, int ox, int oy) {
  Image out(size, size, 0.0);
  for (int y = 0; y < patch.height(); ++y)
    for (int x = 0; x < patch.width(); ++x) out(ox + x, oy + y) = patch(x, y);
  return out;
}

}  // namespace

TEST_CASE("raw and central moments of a small image") {
  Image img(3, 2, std::vector<double>{1, 0, 2, 0, 3, 0});
  const MomentSet m = moment_set(img);
  CHECK(m.raw[0][0] == 6.0);
  CHECK(m.raw[1][0] == 0 * 1 + 2 * 2 + 1 * 3);  // sum x f
  CHECK(m.raw[0][1] == 3.0);                     // sum y f
  CHECK(m.raw[1][1] == 3.0);
  CHECK(m.centroid_x == doctest::Approx(7.0 / 6.0));
  CHECK(m.centroid_y == doctest::Approx(0.5));
  CHECK(m.central[1][0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.central[0][1] == doctest::Approx(0.0).epsilon(1e-12));
  // mu20 = sum (x - xc)^2 f
  const double xc = 7.0 / 6.0;
  CHECK(m.central[2][0] == doctest::Approx(xc * xc * 1 + (2 - xc) * (2 - xc) * 2 + (1 - xc) * (1 - xc) * 3));
  CHECK(m.normalized[2][0] == doctest::Approx(m.central[2][0] / 36.0));
  CHECK_THROWS_AS(moment_set(Image(4, 4, 0.0)), ValidationError);
}

TEST_CASE("Hu invariants") {
  Rng rng(21);
  for (int t = 0; t < 10; ++t) {
    const Image patch = oracle::random_image(rng, 40, 40);
    const Image a = patch_in_canvas(patch, 64, 5, 7);
    const Image b = patch_in_canvas(patch, 64, 17, 2);
    const HuVector ha = hu_moments(a), hb = hu_moments(b);
    for (int k = 0; k < 7; ++k) CHECK(std::abs(ha[k] - hb[k]) <= 1e-9);

    const HuVector r90 = hu_moments(rotate90(a));
    const HuVector r180 = hu_moments(rotate90(rotate90(a)));
    for (int k = 0; k < 7; ++k) {
      CHECK(std::abs(r90[k] - ha[k]) <= 1e-6);
      CHECK(std::abs(r180[k] - ha[k]) <= 1e-6);
    }
    const HuVector up = hu_moments(upscale2(a));
    for (int k = 0; k < 7; ++k) CHECK(std::abs(up[k] - ha[k]) <= 1e-3);

    const HuVector mi = hu_moments(mirror(a));
    for (int k = 0; k < 6; ++k) CHECK(std::abs(mi[k] - ha[k]) <= 1e-6);
    CHECK(std::abs(mi[6] + ha[6]) <= 1e-6);
  }
}

TEST_CASE("printed variant differs only in phi5 and phi7") {
  Rng rng(3);
  Image img = oracle::random_image(rng, 20, 20);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 20; ++x) img(x, y) *= 0.1;  // break symmetry
  const HuVector c = hu_moments(img, HuVariant::Canonical);
  const HuVector p = hu_moments(img, HuVariant::Printed);
  for (int k : {0, 1, 2, 3, 5}) CHECK(c[k] == p[k]);
  CHECK(c[4] != p[4]);
}

TEST_CASE("Hu moments of a centred disc") {
  // A symmetric disc has vanishing odd moments, so phi3..phi7 are near zero.
  Image disc(41, 41, 0.0);
  for (int y = 0; y < 41; ++y)
    for (int x = 0; x < 41; ++x)
      if ((x - 20) * (x - 20) + (y - 20) * (y - 20) <= 15 * 15) disc(x, y) = 1.0;
  const HuVector h = hu_moments(disc);
  CHECK(h[0] == doctest::Approx(1.0 / (2.0 * 3.14159265358979)).epsilon(0.01));
  for (int k = 2; k < 7; ++k) CHECK(std::abs(h[k]) < 1e-12);
}
