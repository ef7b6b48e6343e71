#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wcedetect/dataset.hpp"
#include "wcedetect/filters.hpp"
#include "wcedetect/imgcore.hpp"
#include "wcedetect/learn.hpp"
#include "wcedetect/moments.hpp"

namespace wcedetect {

enum class FeatureMode { Frame, Block };

std::string_view to_string(FeatureMode m);
FeatureMode parse_feature_mode(std::string_view s);

/// Knobs that change feature values; all of them feed the catalog hash.
struct FeatureConfig {
  int glcm_levels = 16;
  GaborCoordinates gabor_coords = GaborCoordinates::Normalized;
  HuVariant hu_variant = HuVariant::Canonical;

  void validate() const;
  bool operator==(const FeatureConfig&) const = default;
};

std::string_view to_string(GaborCoordinates c);
GaborCoordinates parse_gabor_coordinates(std::string_view s);
std::string_view to_string(HuVariant v);
HuVariant parse_hu_variant(std::string_view s);

inline constexpr int kFrameCropSize = 412;
inline constexpr int kBlockSize = 32;

inline constexpr std::size_t kFrameFeatureCount = 1160;
inline constexpr std::size_t kBlockFeatureCount = 381;

struct CatalogEntry {
  std::size_t index = 0;
  std::string family;     // gabor-glcm, gabor-moment, gabor-stat, laws, glcm, moment, lbp1, lbp2, color-stat
  std::string source;     // image or channel the value was computed on
  std::string statistic;  // feature name within the family
  std::string group;      // reporting group: Gabor, Laws, GLCM, Moment, LBP, Color

  /// "family:source:statistic", unique within a catalog.
  std::string tag() const;
  bool operator==(const CatalogEntry&) const = default;
};

class FeatureCatalog {
 public:
  static constexpr int kVersion = 1;

  FeatureCatalog(FeatureMode mode, FeatureConfig config, std::vector<CatalogEntry> entries);

  FeatureMode mode() const { return mode_; }
  const FeatureConfig& config() const { return config_; }
  const std::vector<CatalogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::vector<std::string> tags() const;
  std::size_t count_family(std::string_view family) const;
  std::size_t count_group(std::string_view group) const;

  /// 16 hex digits of FNV-1a over version, mode, config and tags.
  const std::string& hash() const { return hash_; }

  std::string to_json() const;
  static FeatureCatalog from_json(std::string_view text);

 private:
  FeatureMode mode_;
  FeatureConfig config_;
  std::vector<CatalogEntry> entries_;
  std::string hash_;
};

const FeatureCatalog& frame_catalog(const FeatureConfig& config = {});
const FeatureCatalog& block_catalog(const FeatureConfig& config = {});
const FeatureCatalog& catalog_for(FeatureMode mode, const FeatureConfig& config = {});

/// Frame-level vector on the centred 412x412 grayscale crop.
std::vector<double> frame_features(const Frame& frame, const FeatureConfig& config = {});

/// Block-level vector of one 32x32 RGB sub-image.
std::vector<double> block_features(const Frame& block, const FeatureConfig& config = {});

/// One row per 32x32 block in row-major grid order.
FeatureMatrix frame_block_features(const Frame& frame, const FeatureConfig& config = {});

/// Per-column min-max scaling fitted on training rows.
struct Normalizer {
  std::vector<double> min;
  std::vector<double> max;

  static Normalizer fit(const FeatureMatrix& x);
  std::size_t size() const { return min.size(); }
  /// Maps into [0,1], clamping unseen values; constant columns map to 0.
  std::vector<double> apply(std::span<const double> row) const;
  FeatureMatrix apply(const FeatureMatrix& x) const;
};

/// A binary network together with the catalog columns it reads.
struct ClassNetwork {
  LesionClass target = LesionClass::Tumor;
  std::vector<std::size_t> selected;
  MlpModel model;
};

/// Whether smoothing runs on the block grid or on the replicated pixel mask.
enum class MedianTarget { Blocks, Pixels };

std::string_view to_string(MedianTarget t);
MedianTarget parse_median_target(std::string_view s);

inline constexpr int kMedianWindow = 5;

struct SegmentationResult {
  LesionClass target = LesionClass::Tumor;
  ProbabilityGrid probability;
  LabelGrid raw;       // probability >= 0.5, per block
  LabelGrid smoothed;  // after median smoothing, per block
  LabelGrid mask;      // per pixel
};

/// Segments one frame from its already-extracted block rows (grid_rows x grid_cols rows, raw
/// feature values). With MedianTarget::Pixels the block grid `smoothed` is the block-wise
/// majority of the smoothed pixel mask.
std::vector<SegmentationResult> segment_blocks(const FeatureMatrix& block_rows, int grid_rows, int grid_cols,
                                               const Normalizer& normalizer,
                                               std::span<const ClassNetwork> networks,
                                               MedianTarget median_target = MedianTarget::Blocks);

std::vector<SegmentationResult> segment_frame(const Frame& frame, const FeatureConfig& config,
                                              const Normalizer& normalizer,
                                              std::span<const ClassNetwork> networks,
                                              MedianTarget median_target = MedianTarget::Blocks);

/// Probability of the positive class for one raw feature row.
double classify_row(std::span<const double> raw_row, const Normalizer& normalizer, const ClassNetwork& network);

}  // namespace wcedetect
