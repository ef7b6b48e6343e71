#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "wcedetect/filters.hpp"

using namespace wcedetect;

TEST_CASE("gabor kernel sampling") {
  GaborParams p;
  p.range = 10;
  CHECK(p.support() == 11);
  p.range = 21;
  CHECK(p.support() == 21);
  CHECK(gabor_coordinate(0, 11, GaborCoordinates::Normalized) == -1.0);
  CHECK(gabor_coordinate(10, 11, GaborCoordinates::Normalized) == 1.0);
  CHECK(gabor_coordinate(5, 11, GaborCoordinates::Normalized) == 0.0);
  CHECK(gabor_coordinate(0, 11, GaborCoordinates::Pixel) == -5.0);

  p.range = 11;
  p.frequency = 0.5;
  const ComplexImage k = gabor_kernel(p);
  CHECK(k.width() == 11);
  // Centre value: envelope 1, carrier phase 0.
  CHECK(k(5, 5).real() == doctest::Approx(1.0 / (2.0 * 3.141592653589793 * 0.25)));
  CHECK(k(5, 5).imag() == doctest::Approx(0.0));

  // theta = 90 swaps the roles of the axes exactly.
  GaborParams q = p;
  q.theta_deg = 90;
  const ComplexImage k90 = gabor_kernel(q);
  for (int v = 0; v < 11; ++v)
    for (int u = 0; u < 11; ++u) CHECK(std::abs(k90(u, v) - k(v, u)) <= 1e-15);

  GaborParams bad = p;
  bad.sigma_x = 0;
  CHECK_THROWS_AS(gabor_kernel(bad), ValidationError);
}

TEST_CASE("separable gabor response equals the direct 2D path") {
  Rng rng(6);
  const Image img = oracle::random_image(rng, 40, 30);
  for (double f : {0.5, 1.5}) {
    for (int theta : {0, 45, 90, 135}) {
      for (auto coords : {GaborCoordinates::Normalized, GaborCoordinates::Pixel}) {
        GaborParams p;
        p.frequency = f;
        p.theta_deg = theta;
        p.range = 20;
        p.coords = coords;
        if (coords == GaborCoordinates::Pixel) p.sigma_x = p.sigma_y = 3.0;
        const Image fast = gabor_response(img, p);
        const Image slow = gabor_response(img, p, /*allow_separable=*/false);
        for (std::size_t i = 0; i < fast.size(); ++i) CHECK(std::abs(fast.values()[i] - slow.values()[i]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("gabor responses stay within the input range") {
  Rng rng(7);
  const Image img = oracle::random_image(rng, 48, 48);
  for (const auto& g : gabor_bank_method1(img)) {
    for (double v : g.image.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 255.0 + 1e-9);
    }
  }
  // A constant image through the zero-frequency-free kernel still has bounded magnitude.
  GaborParams p;
  const Image flat = gabor_response(Image(20, 20, 255.0), p);
  for (double v : flat.values()) CHECK(v <= 255.0 + 1e-9);
}

TEST_CASE("gabor banks") {
  Rng rng(8);
  const Image img = oracle::random_image(rng, 32, 32);
  const auto b1 = gabor_bank_method1(img);
  const auto b2 = gabor_bank_method2(img);
  CHECK(b1.size() == 30);
  CHECK(b2.size() == 10);
  const auto l1 = gabor_bank_method1_labels();
  const auto l2 = gabor_bank_method2_labels();
  REQUIRE(l1.size() == 30);
  REQUIRE(l2.size() == 10);
  for (std::size_t i = 0; i < b1.size(); ++i) CHECK(b1[i].label == l1[i]);
  for (std::size_t i = 0; i < b2.size(); ++i) CHECK(b2[i].label == l2[i]);
  CHECK(l1.front() == "f0.5_t0_r10");
  CHECK(l1[4] == "f0.5_t0_r20");
  CHECK(l1[24] == "f0.5_r10_mean");
  CHECK(std::set<std::string>(l1.begin(), l1.end()).size() == 30);

  // The orientation mean is the pixelwise average of its four responses.
  for (std::size_t i = 0; i < img.size(); i += 37) {
    const double avg = (b2[0].image.values()[i] + b2[1].image.values()[i] + b2[2].image.values()[i] +
                        b2[3].image.values()[i]) / 4.0;
    CHECK(b2[8].image.values()[i] == doctest::Approx(avg));
  }
}

TEST_CASE("Laws masks") {
  CHECK(laws_masks(5).size() == 15);
  CHECK(laws_masks(7).size() == 21);
  CHECK(laws_kernels_1d(5).size() == 5);
  CHECK(laws_kernels_1d(7).size() == 6);
  CHECK_THROWS_AS(laws_masks(6), ValidationError);
  CHECK(laws_masks(5).front().name == "L5L5");
  CHECK(laws_masks(5)[1].name == "L5E5");

  // Masks are symmetric averages of the two outer products.
  for (int tap : {5, 7}) {
    for (const auto& m : laws_masks(tap)) {
      for (int r = 0; r < tap; ++r)
        for (int c = 0; c < tap; ++c) CHECK(m.kernel(c, r) == m.kernel(r, c));
    }
  }
  // L5 (x) E5 sums to zero.
  double s = 0;
  for (double v : laws_masks(5)[1].kernel.values()) s += v;
  CHECK(s == 0.0);
}

TEST_CASE("Laws features via separable passes match direct 2D convolution") {
  Rng rng(9);
  const Image img = oracle::random_image(rng, 32, 32);
  for (int tap : {5, 7}) {
    const auto f = laws_features(img, tap);
    const auto& masks = laws_masks(tap);
    REQUIRE(f.size() == masks.size() * 5);
    for (std::size_t m = 0; m < masks.size(); ++m) {
      const Image response = convolve2d(img, masks[m].kernel);
      const StatSummary s = stats(response, value_range(response.values()));
      CHECK(f[m * 5 + 0] == doctest::Approx(s.mean).epsilon(1e-9));
      CHECK(f[m * 5 + 1] == doctest::Approx(s.variance).epsilon(1e-9));
      CHECK(f[m * 5 + 2] == doctest::Approx(s.skewness).epsilon(1e-7));
      CHECK(f[m * 5 + 3] == doctest::Approx(s.kurtosis).epsilon(1e-7));
      CHECK(f[m * 5 + 4] == doctest::Approx(s.entropy).epsilon(1e-6));
    }
  }
  CHECK(laws_features(img, 5).size() == 75);
  CHECK(laws_features(img, 7).size() == 105);
}

TEST_CASE("zero-sum Laws masks give zero mean on constant images") {
  for (int tap : {5, 7}) {
    const auto f = laws_features(Image(20, 20, 137.0), tap);
    const auto& masks = laws_masks(tap);
    for (std::size_t m = 0; m < masks.size(); ++m) {
      const bool level_only = masks[m].name[0] == 'L' && masks[m].name[2] == 'L';
      if (!level_only) CHECK(std::abs(f[m * 5]) <= 1e-9);
    }
    const auto z = laws_features(Image(20, 20, 0.0), tap);
    for (std::size_t m = 0; m < masks.size(); ++m) {
      CHECK(z[m * 5] == 0.0);
      CHECK(z[m * 5 + 1] == 0.0);
    }
  }
}

TEST_CASE("gabor magnitude ignores a constant offset when the kernel has no DC") {
  Rng rng(10);
  const Image img = oracle::random_image(rng, 48, 48);
  Image lifted = img;
  for (auto& v : lifted.values()) v += 40.0;
  int asserted = 0;
  for (double f : {0.5, 1.5, 4.0}) {
    for (int range : {10, 20, 40}) {
      GaborParams p;
      p.frequency = f;
      p.range = range;
      const ComplexImage k = gabor_kernel(p);
      std::complex<double> dc = 0;
      for (auto v : k.values()) dc += v;
      if (std::abs(dc) >= 1e-6) continue;
      ++asserted;
      const Image a = gabor_response(img, p), b = gabor_response(lifted, p);
      // Edge replication keeps the offset constant everywhere, so responses agree to rounding.
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) <= 1e-9);
    }
  }
  MESSAGE("kernels with near-zero DC: " << asserted);
}
