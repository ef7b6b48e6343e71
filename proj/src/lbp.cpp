#include "wcedetect/lbp.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace wcedetect::lbp {
namespace {

constexpr int kCenter = kBlockSize / 2;

template <std::size_t N>
Ring make_ring(int radius, const std::array<int, N>& cells) {
  Ring ring{radius, static_cast<int>(N), {}};
  for (int cell : cells) {
    ring.offsets.emplace_back((cell - 1) / kBlockSize - kCenter, (cell - 1) % kBlockSize - kCenter);
  }
  check_ring_geometry(ring);
  return ring;
}

void check_subimage(const Image& image, const char* what) {
  if (image.width() != kSubImageSize || image.height() != kSubImageSize) {
    throw ValidationError(std::string(what) + ": sub-image must be 32x32, got " +
                          std::to_string(image.width()) + "x" + std::to_string(image.height()));
  }
}

std::uint32_t code_at(const Image& image, int cx, int cy, const Ring& ring) {
  const double center = image(cx, cy);
  std::uint32_t code = 0;
  for (int j = 0; j < ring.neighbor_count; ++j) {
    const auto [dr, dc] = ring.offsets[j];
    if (image(cx + dc, cy + dr) >= center) code |= 1u << j;
  }
  return code;
}

template <std::size_t N>
void append_bins(std::vector<double>& out, const std::vector<std::uint32_t>& codes,
                 const std::array<std::uint32_t, N>& edges) {
  for (std::size_t i = 0; i + 1 < N; ++i) {
    std::size_t count = 0;
    for (auto v : codes) count += (v >= edges[i] && v < edges[i + 1]);
    out.push_back(static_cast<double>(count) / kPlacements);
  }
}

double closed_fraction(const std::vector<std::uint32_t>& codes, std::uint32_t lo, std::uint32_t hi) {
  std::size_t count = 0;
  for (auto v : codes) count += (v >= lo && v <= hi);
  return static_cast<double>(count) / kPlacements;
}

}  // namespace

void check_ring_geometry(const Ring& ring) {
  const auto fail = [&](const std::string& why) {
    throw std::logic_error("LBP ring radius " + std::to_string(ring.radius) + ": " + why);
  };
  if (static_cast<int>(ring.offsets.size()) != ring.neighbor_count) fail("offset count mismatch");
  if (ring.neighbor_count != 4 + 4 * ring.radius) fail("neighbor count does not match radius");
  std::set<std::pair<int, int>> seen;
  for (std::size_t j = 0; j < ring.offsets.size(); ++j) {
    const auto [r, c] = ring.offsets[j];
    const auto [nr, nc] = ring.offsets[(j + 1) % ring.offsets.size()];
    if (std::max(std::abs(r - nr), std::abs(c - nc)) != 1) fail("ring is not 8-connected");
    const double dist = std::hypot(r, c);
    if (std::abs(dist - ring.radius) > 0.5) fail("neighbor off the ring");
    if (!seen.insert({r, c}).second) fail("duplicate neighbor");
  }
}

const std::array<Ring, 3>& rings() {
  static const std::array<Ring, 3> table = {make_ring(3, kCellsRadius3), make_ring(2, kCellsRadius2),
                                            make_ring(1, kCellsRadius1)};
  return table;
}

const Ring& ring_for_radius(int radius) {
  if (radius < 1 || radius > 3) throw ValidationError("LBP radius must be 1, 2 or 3");
  return rings()[3 - radius];
}

std::uint32_t lbp_code(const Image& block, const Ring& ring) {
  if (block.width() != kBlockSize || block.height() != kBlockSize) {
    throw ValidationError("lbp_code: block must be 7x7");
  }
  return code_at(block, kCenter, kCenter, ring);
}

std::uint32_t rotation_invariant(std::uint32_t code, int bits) {
  if (bits < 1 || bits > 31) throw ValidationError("rotation_invariant: unsupported width");
  const std::uint32_t mask = (1u << bits) - 1u;
  code &= mask;
  std::uint32_t best = code;
  std::uint32_t v = code;
  for (int k = 1; k < bits; ++k) {
    v = ((v >> 1) | (v << (bits - 1))) & mask;
    best = std::min(best, v);
  }
  return best;
}

std::vector<std::uint32_t> placement_codes(const Image& subimage, const Ring& ring) {
  check_subimage(subimage, "placement_codes");
  std::vector<std::uint32_t> codes;
  codes.reserve(kPlacements);
  for (int y = 0; y < kPlacementsPerAxis; ++y) {
    for (int x = 0; x < kPlacementsPerAxis; ++x) {
      codes.push_back(code_at(subimage, x + kCenter, y + kCenter, ring));
    }
  }
  return codes;
}

std::vector<double> lbp1_features(const Image& subimage) {
  check_subimage(subimage, "lbp1_features");
  std::array<std::vector<std::uint32_t>, 3> ri;
  for (std::size_t r = 0; r < 3; ++r) {
    const Ring& ring = rings()[r];
    ri[r] = placement_codes(subimage, ring);
    for (auto& c : ri[r]) c = rotation_invariant(c, ring.neighbor_count);
  }

  std::vector<double> out;
  out.reserve(kLbp1Size);
  append_bins(out, ri[0], kEdgesH1);
  append_bins(out, ri[1], kEdgesH2);
  append_bins(out, ri[2], kEdgesH3);
  out.push_back(closed_fraction(ri[0], kEdgesH1[14], kEdgesH1[15]));
  out.push_back(closed_fraction(ri[0], kEdgesH1[13], kEdgesH1[14]));
  out.push_back(closed_fraction(ri[1], kEdgesH2[10], kEdgesH2[11]));
  out.push_back(closed_fraction(ri[2], kEdgesH3[6], kEdgesH3[7]));
  return out;
}

std::vector<double> lbp2_features(const Image& subimage) {
  check_subimage(subimage, "lbp2_features");
  std::vector<double> out;
  out.reserve(kLbp2Size);
  for (const Ring& ring : rings()) {
    std::vector<std::size_t> set_count(ring.neighbor_count, 0);
    for (auto code : placement_codes(subimage, ring)) {
      for (int j = 0; j < ring.neighbor_count; ++j) set_count[j] += (code >> j) & 1u;
    }
    for (auto c : set_count) out.push_back(static_cast<double>(c) / kPlacements);
  }
  return out;
}

std::vector<double> lbp1_pair(const Image& gray, const Image& green) {
  if (gray.width() != green.width() || gray.height() != green.height()) {
    throw ValidationError("lbp1_pair: channel size mismatch");
  }
  auto out = lbp1_features(gray);
  auto second = lbp1_features(green);
  out.insert(out.end(), second.begin(), second.end());
  return out;
}

}  // namespace wcedetect::lbp
