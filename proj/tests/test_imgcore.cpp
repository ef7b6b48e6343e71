#include <doctest.h>

#include "oracles.hpp"
#include "wcedetect/imgcore.hpp"

using namespace wcedetect;

namespace {

Frame solid(int w, int h, Rgb c) {
  Frame f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) f.set(x, y, c);
  return f;
}

}  // namespace

TEST_CASE("grayscale uses BT.601 weights without rounding") {
  CHECK(luma({100, 100, 100}) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(luma({255, 0, 0}) == doctest::Approx(76.245).epsilon(1e-12));
  CHECK(luma({10, 20, 30}) == doctest::Approx(18.15).epsilon(1e-12));
  const Image g = to_grayscale(solid(3, 2, {10, 20, 30}));
  CHECK(g.width() == 3);
  CHECK(g.height() == 2);
  CHECK(g(2, 1) == doctest::Approx(0.299 * 10 + 0.587 * 20 + 0.114 * 30));

  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto v = static_cast<std::uint8_t>(rng.below(256));
    CHECK(std::abs(luma({v, v, v}) - v) <= 1e-9);
  }
}

TEST_CASE("hexcone HSV") {
  auto [h1, s1] = hue_saturation({255, 0, 0});
  CHECK(h1 == 0.0);
  CHECK(s1 == 1.0);
  auto [h2, s2] = hue_saturation({128, 128, 128});
  CHECK(h2 == 0.0);
  CHECK(s2 == 0.0);
  auto [h3, s3] = hue_saturation({0, 255, 255});
  CHECK(h3 == doctest::Approx(180.0));
  CHECK(s3 == 1.0);
  auto [h4, s4] = hue_saturation({255, 0, 128});
  CHECK(h4 >= 300.0);
  CHECK(h4 < 360.0);
  CHECK(s4 == 1.0);
}

TEST_CASE("crop_center offsets") {
  Image img(512, 512);
  for (int y = 0; y < 512; ++y)
    for (int x = 0; x < 512; ++x) img(x, y) = x + 1000.0 * y;
  CHECK(center_offset(512, 512, 412, 412) == std::pair{50, 50});
  const Image c = crop_center(img, 412, 412);
  CHECK(c(0, 0) == img(50, 50));
  CHECK(crop_center(img, 512, 512) == img);
  const Image small = crop_center(crop(img, 0, 0, 100, 100), 50, 50);
  CHECK(small(0, 0) == img(25, 25));
  CHECK_THROWS_AS(crop_center(img, 513, 10), ValidationError);

  // Nested centred crops of the same parity compose.
  CHECK(crop_center(crop_center(img, 300, 300), 200, 200) == crop_center(img, 200, 200));
}

TEST_CASE("tile and untile") {
  Rng rng(1);
  const Image img = oracle::random_image(rng, 512, 512);
  const auto tiles = tile(img, 32);
  CHECK(tiles.size() == 256);
  CHECK(untile(tiles, 16, 16) == img);

  const Image one = oracle::random_image(rng, 32, 32);
  CHECK(tile(one, 32).front().image == one);

  const Image four = oracle::random_image(rng, 64, 64);
  const auto t4 = tile(four, 32);
  REQUIRE(t4.size() == 4);
  CHECK(t4[3].row == 1);
  CHECK(t4[3].col == 1);
  CHECK(t4[3].image(0, 0) == four(32, 32));
  CHECK_THROWS_AS(tile(Image(50, 64), 32), ValidationError);

  const Frame f = solid(64, 32, {1, 2, 3});
  CHECK(tile(f, 32).size() == 2);
}

TEST_CASE("convolution") {
  Rng rng(2);
  const Image img = oracle::random_image(rng, 9, 7);
  CHECK(convolve2d(img, Image(1, 1, 1.0)) == img);

  const Image constant(6, 6, 3.0);
  Image k(3, 3);
  for (auto& v : k.values()) v = rng.uniform(-1, 1);
  double ksum = 0;
  for (double v : k.values()) ksum += v;
  const Image flat = convolve2d(constant, k);
  for (double v : flat.values()) CHECK(v == doctest::Approx(3.0 * ksum));

  const Image box(3, 3, 1.0 / 9.0);
  const Image small = oracle::random_image(rng, 3, 3);
  double mean = 0;
  for (double v : small.values()) mean += v / 9.0;
  CHECK(convolve2d(small, box)(1, 1) == doctest::Approx(mean));

  // Flipped kernel: an impulse kernel off-centre shifts the image the other way.
  Image shift(3, 3, 0.0);
  shift(2, 1) = 1.0;
  const Image shifted = convolve2d(img, shift);
  CHECK(shifted(4, 3) == img(3, 3));

  CHECK_THROWS_AS(convolve2d(img, Image(2, 3, 1.0)), ValidationError);

  // Linearity in the kernel.
  Image k1(5, 5), k2(5, 5), mix(5, 5);
  for (int i = 0; i < 25; ++i) {
    k1.values()[i] = rng.uniform(-1, 1);
    k2.values()[i] = rng.uniform(-1, 1);
    mix.values()[i] = 2.5 * k1.values()[i] - 0.75 * k2.values()[i];
  }
  const Image a = convolve2d(img, k1), b = convolve2d(img, k2), m = convolve2d(img, mix);
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(std::abs(m.values()[i] - (2.5 * a.values()[i] - 0.75 * b.values()[i])) <= 1e-9);
  }

  // Separable path equals the 2D path on the outer-product kernel.
  const std::vector<double> h = {1, -2, 3, 0.5, 2}, v = {0.25, 1, -1};
  Image outer(5, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x) outer(x, y) = h[x] * v[y];
  const Image sep = convolve_separable<double>(img, h, v);
  const Image full = convolve2d(img, outer);
  for (std::size_t i = 0; i < sep.size(); ++i) CHECK(std::abs(sep.values()[i] - full.values()[i]) <= 1e-9);
}

TEST_CASE("median filter") {
  LabelGrid grid(16, 16, 0);
  CHECK(median_filter(grid, 5) == grid);
  grid(7, 8) = 1;
  CHECK(median_filter(grid, 5) == LabelGrid(16, 16, 0));
  CHECK(median_filter(grid, 1) == grid);
  CHECK_THROWS_AS(median_filter(grid, 4), ValidationError);
  const LabelGrid ones(16, 16, 1);
  CHECK(median_filter(ones, 5) == ones);

  // A single 3x3 pass is not idempotent on uniform random grids, but repeated passes
  // reach a root grid that the filter leaves unchanged.
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    LabelGrid g(16, 16);
    for (auto& v : g.values()) v = static_cast<std::uint8_t>(rng.below(2));
    int passes = 0;
    for (LabelGrid next = median_filter(g, 3); !(next == g) && passes < 64; next = median_filter(g, 3)) {
      g = next;
      ++passes;
    }
    CAPTURE(t);
    CHECK(passes < 64);
    CHECK(median_filter(g, 3) == g);
  }
}

TEST_CASE("summary statistics") {
  const std::vector<double> same(10, 7.0);
  const StatSummary s = stats(same);
  CHECK(s.mean == 7.0);
  CHECK(s.variance == 0.0);
  CHECK(s.skewness == 0.0);
  CHECK(s.kurtosis == 0.0);
  CHECK(s.entropy == 0.0);

  const std::vector<double> two = {0, 255, 0, 255};
  CHECK(stats(two).entropy == doctest::Approx(1.0));

  const std::vector<double> four = {1, 2, 3, 4};
  const StatSummary f = stats(four);
  CHECK(f.mean == doctest::Approx(2.5));
  CHECK(f.variance == doctest::Approx(1.25));
  CHECK(f.skewness == doctest::Approx(0.0));
  CHECK(f.kurtosis == doctest::Approx((2 * std::pow(1.5, 4) + 2 * std::pow(0.5, 4)) / 4 / (1.25 * 1.25)));

  CHECK_THROWS_AS(stats(std::vector<double>{}), ValidationError);

  Rng rng(4);
  std::vector<double> v(500);
  for (auto& x : v) x = rng.uniform(0, 255);
  const StatSummary r = stats(v);
  CHECK(r.variance >= 0.0);
  CHECK(r.entropy >= 0.0);
  CHECK(r.entropy <= 8.0);
}
