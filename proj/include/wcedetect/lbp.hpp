#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wcedetect/imgcore.hpp"

namespace wcedetect::lbp {

inline constexpr int kBlockSize = 7;
inline constexpr int kSubImageSize = 32;
inline constexpr int kPlacementsPerAxis = kSubImageSize - kBlockSize + 1;  // 26
inline constexpr int kPlacements = kPlacementsPerAxis * kPlacementsPerAxis;  // 676

inline constexpr std::size_t kLbp1Size = 37;
inline constexpr std::size_t kLbp2Size = 36;

/// Neighbor cells are numbered 1..49 row-major inside the 7x7 block; cell 25 is the center.
inline constexpr std::array<int, 16> kCellsRadius3 = {3,  4,  5,  13, 21, 28, 35, 41,
                                                      47, 46, 45, 37, 29, 22, 15, 9};
inline constexpr std::array<int, 12> kCellsRadius2 = {10, 11, 12, 20, 27, 34, 40, 39, 38, 30, 23, 16};
inline constexpr std::array<int, 8> kCellsRadius1 = {17, 18, 19, 26, 33, 32, 31, 24};

/// Histogram edges for rotation-invariant codes. H1 keeps the published 32768
/// where the pattern would suggest 32767.
inline constexpr std::array<std::uint32_t, 16> kEdgesH1 = {1,    3,    7,    15,   31,    63,    127,   255,
                                                           511,  1023, 2047, 4095, 8191, 16383, 32768, 65535};
inline constexpr std::array<std::uint32_t, 12> kEdgesH2 = {1, 3, 7, 15, 31, 63, 127, 255, 511, 1023, 2047, 4095};
inline constexpr std::array<std::uint32_t, 8> kEdgesH3 = {1, 3, 7, 15, 31, 63, 127, 255};

struct Ring {
  int radius = 0;
  int neighbor_count = 0;
  /// (drow, dcol) relative to the block center, in bit order (first = least significant).
  std::vector<std::pair<int, int>> offsets;
};

/// Rings in feature order: radius 3 (16 neighbors), radius 2 (12), radius 1 (8).
/// Geometry is validated on first use: each ring must be closed and 8-connected.
const std::array<Ring, 3>& rings();
const Ring& ring_for_radius(int radius);

/// Throws std::logic_error if offsets are not a closed 8-connected loop at the expected radius.
void check_ring_geometry(const Ring& ring);

/// Code of a 7x7 block; bit j is set when neighbor j >= center.
std::uint32_t lbp_code(const Image& block, const Ring& ring);

/// Minimum over all circular rotations of the `bits`-wide pattern.
std::uint32_t rotation_invariant(std::uint32_t code, int bits);

/// Codes for all 676 block placements of a 32x32 sub-image, row-major by block origin.
std::vector<std::uint32_t> placement_codes(const Image& subimage, const Ring& ring);

/// Histogram fractions of rotation-invariant codes: 15 + 11 + 7 bins, then 4 closed-interval extras.
std::vector<double> lbp1_features(const Image& subimage);

/// Per-neighbor set-bit frequency of the raw codes: 16 + 12 + 8.
std::vector<double> lbp2_features(const Image& subimage);

/// lbp1(gray) followed by lbp1(green).
std::vector<double> lbp1_pair(const Image& gray, const Image& green);

}  // namespace wcedetect::lbp
