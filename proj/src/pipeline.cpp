#include "wcedetect/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include <json.hpp>

#include "wcedetect/glcm.hpp"
#include "wcedetect/lbp.hpp"

namespace wcedetect {
namespace {

constexpr std::array<int, 4> kGlcmAngles = {0, 45, 90, 135};
constexpr std::array<std::string_view, 5> kStatNames = {"mean", "variance", "skewness", "kurtosis", "entropy"};
constexpr int kLawsTapFrame = 5;
constexpr int kLawsTapBlock = 7;

std::string group_of(std::string_view family) {
  if (family.starts_with("gabor")) return "Gabor";
  if (family == "laws") return "Laws";
  if (family == "glcm") return "GLCM";
  if (family == "moment") return "Moment";
  if (family == "lbp1" || family == "lbp2") return "LBP";
  if (family == "color-stat") return "Color";
  throw ValidationError("unknown feature family '" + std::string(family) + "'");
}

class CatalogBuilder {
 public:
  void add(std::string_view family, std::string_view source, std::string_view statistic) {
    entries_.push_back({entries_.size(), std::string(family), std::string(source), std::string(statistic),
                        group_of(family)});
  }
  void add_stats(std::string_view family, std::string_view source, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) add(family, source, kStatNames[i]);
  }
  void add_glcm(std::string_view family, std::string_view source) {
    for (auto name : glcm_feature_names()) add(family, source, name);
  }
  void add_hu(std::string_view family, std::string_view source) {
    for (int i = 1; i <= 7; ++i) add(family, source, "hu" + std::to_string(i));
  }
  std::vector<CatalogEntry> take() { return std::move(entries_); }

 private:
  std::vector<CatalogEntry> entries_;
};

std::string angle_source(std::string_view image, int angle) {
  return std::string(image) + "_a" + std::to_string(angle);
}

std::vector<CatalogEntry> build_frame_entries() {
  CatalogBuilder b;
  for (const auto& label : gabor_bank_method1_labels()) {
    b.add_glcm("gabor-glcm", label);
    b.add_hu("gabor-moment", label);
    b.add_stats("gabor-stat", label, 4);
  }
  for (const auto& mask : laws_masks(kLawsTapFrame)) b.add_stats("laws", mask.name, 5);
  for (int angle : kGlcmAngles) b.add_glcm("glcm", angle_source("gray", angle));
  b.add_hu("moment", "gray");
  return b.take();
}

std::string two_digits(int v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d", v);
  return buf;
}

void add_lbp1(CatalogBuilder& b, std::string_view channel) {
  const std::array<std::pair<std::string, int>, 3> rings = {{{"r3", 15}, {"r2", 11}, {"r1", 7}}};
  for (const auto& [name, bins] : rings) {
    for (int k = 1; k <= bins; ++k) b.add("lbp1", channel, name + "_bin" + two_digits(k));
  }
  b.add("lbp1", channel, "r3_span15_16");
  b.add("lbp1", channel, "r3_span14_15");
  b.add("lbp1", channel, "r2_span11_12");
  b.add("lbp1", channel, "r1_span07_08");
}

std::vector<CatalogEntry> build_block_entries() {
  CatalogBuilder b;
  add_lbp1(b, "gray");
  add_lbp1(b, "green");
  for (const lbp::Ring& ring : lbp::rings()) {
    for (int j = 1; j <= ring.neighbor_count; ++j) {
      b.add("lbp2", "gray", "r" + std::to_string(ring.radius) + "_n" + two_digits(j));
    }
  }
  for (int angle : kGlcmAngles) {
    b.add_glcm("glcm", angle_source("gray", angle));
    b.add("glcm", angle_source("gray", angle), "gray_mean");
  }
  for (const auto& mask : laws_masks(kLawsTapBlock)) b.add_stats("laws", mask.name, 5);
  for (const auto& label : gabor_bank_method2_labels()) b.add_stats("gabor-stat", label, 5);
  for (std::string_view channel : {"red", "green", "blue", "hue", "saturation", "gray"}) {
    b.add_stats("color-stat", channel, 4);
  }
  return b.take();
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void append_glcm(std::vector<double>& out, const Image& image, int levels, int angle) {
  GlcmConfig cfg;
  cfg.levels = levels;
  cfg.angle = angle;
  const GlcmFeatures f = glcm_features(compute_glcm(image, cfg));
  out.insert(out.end(), f.values.begin(), f.values.end());
}

// An all-zero response has no centroid; its shape descriptors are reported as 0.
void append_hu(std::vector<double>& out, const Image& image, HuVariant variant) {
  const bool has_mass = std::any_of(image.values().begin(), image.values().end(), [](double v) { return v != 0.0; });
  HuVector hu{};
  if (has_mass) hu = hu_moments(image, variant);
  out.insert(out.end(), hu.begin(), hu.end());
}

void append_stats(std::vector<double>& out, const StatSummary& s, std::size_t count) {
  const std::array<double, 5> v = {s.mean, s.variance, s.skewness, s.kurtosis, s.entropy};
  out.insert(out.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(count));
}

void check_length(const std::vector<double>& v, std::size_t expected, const char* what) {
  if (v.size() != expected) {
    throw std::logic_error(std::string(what) + ": produced " + std::to_string(v.size()) + " values, expected " +
                           std::to_string(expected));
  }
}

}  // namespace

std::string_view to_string(FeatureMode m) { return m == FeatureMode::Frame ? "frame" : "block"; }

FeatureMode parse_feature_mode(std::string_view s) {
  if (s == "frame") return FeatureMode::Frame;
  if (s == "block") return FeatureMode::Block;
  throw ValidationError("mode must be 'frame' or 'block', got '" + std::string(s) + "'");
}

std::string_view to_string(GaborCoordinates c) { return c == GaborCoordinates::Normalized ? "normalized" : "pixel"; }

GaborCoordinates parse_gabor_coordinates(std::string_view s) {
  if (s == "normalized") return GaborCoordinates::Normalized;
  if (s == "pixel") return GaborCoordinates::Pixel;
  throw ValidationError("gabor coordinates must be 'normalized' or 'pixel', got '" + std::string(s) + "'");
}

std::string_view to_string(HuVariant v) { return v == HuVariant::Canonical ? "canonical" : "paper"; }

HuVariant parse_hu_variant(std::string_view s) {
  if (s == "canonical") return HuVariant::Canonical;
  if (s == "paper") return HuVariant::Printed;
  throw ValidationError("hu variant must be 'canonical' or 'paper', got '" + std::string(s) + "'");
}

std::string_view to_string(MedianTarget t) { return t == MedianTarget::Blocks ? "blocks" : "pixels"; }

MedianTarget parse_median_target(std::string_view s) {
  if (s == "blocks") return MedianTarget::Blocks;
  if (s == "pixels") return MedianTarget::Pixels;
  throw ValidationError("median target must be 'blocks' or 'pixels', got '" + std::string(s) + "'");
}

void FeatureConfig::validate() const {
  GlcmConfig g;
  g.levels = glcm_levels;
  g.validate();
}

std::string CatalogEntry::tag() const { return family + ":" + source + ":" + statistic; }

FeatureCatalog::FeatureCatalog(FeatureMode mode, FeatureConfig config, std::vector<CatalogEntry> entries)
    : mode_(mode), config_(config), entries_(std::move(entries)) {
  config_.validate();
  std::string text = "wcedetect-catalog v" + std::to_string(kVersion) + "\n";
  text += std::string(to_string(mode_)) + "\n";
  text += "levels=" + std::to_string(config_.glcm_levels) + " gabor=" + std::string(to_string(config_.gabor_coords)) +
          " hu=" + std::string(to_string(config_.hu_variant)) + "\n";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].index != i) throw ValidationError("FeatureCatalog: indices must be dense and ordered");
    text += entries_[i].tag() + "\n";
  }
  hash_ = fnv1a_hex(text);
}

std::vector<std::string> FeatureCatalog::tags() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.tag());
  return out;
}

std::size_t FeatureCatalog::count_family(std::string_view family) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [&](const CatalogEntry& e) { return e.family == family; }));
}

std::size_t FeatureCatalog::count_group(std::string_view group) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [&](const CatalogEntry& e) { return e.group == group; }));
}

std::string FeatureCatalog::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "wcedetect-catalog";
  j["version"] = kVersion;
  j["mode"] = to_string(mode_);
  j["config"] = {{"glcm_levels", config_.glcm_levels},
                 {"gabor_coords", to_string(config_.gabor_coords)},
                 {"hu_variant", to_string(config_.hu_variant)}};
  j["hash"] = hash_;
  auto& list = j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries_) {
    list.push_back({{"index", e.index},
                    {"family", e.family},
                    {"source", e.source},
                    {"statistic", e.statistic},
                    {"group", e.group}});
  }
  return j.dump(1) + "\n";
}

FeatureCatalog FeatureCatalog::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "wcedetect-catalog" || j.at("version") != kVersion) {
      throw DataError("catalog: unsupported format or version");
    }
    FeatureConfig cfg;
    cfg.glcm_levels = j.at("config").at("glcm_levels").get<int>();
    cfg.gabor_coords = parse_gabor_coordinates(j.at("config").at("gabor_coords").get<std::string>());
    cfg.hu_variant = parse_hu_variant(j.at("config").at("hu_variant").get<std::string>());
    std::vector<CatalogEntry> entries;
    for (const auto& e : j.at("entries")) {
      entries.push_back({e.at("index").get<std::size_t>(), e.at("family").get<std::string>(),
                         e.at("source").get<std::string>(), e.at("statistic").get<std::string>(),
                         e.at("group").get<std::string>()});
    }
    FeatureCatalog cat(parse_feature_mode(j.at("mode").get<std::string>()), cfg, std::move(entries));
    if (cat.hash() != j.at("hash").get<std::string>()) throw DataError("catalog: stored hash does not match entries");
    return cat;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("catalog: malformed JSON: ") + e.what());
  }
}

const FeatureCatalog& catalog_for(FeatureMode mode, const FeatureConfig& config) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int, int>, std::unique_ptr<FeatureCatalog>> cache;
  const auto key = std::make_tuple(static_cast<int>(mode), config.glcm_levels, static_cast<int>(config.gabor_coords),
                                   static_cast<int>(config.hu_variant));
  std::lock_guard lock(mutex);
  auto& slot = cache[key];
  if (!slot) {
    auto entries = mode == FeatureMode::Frame ? build_frame_entries() : build_block_entries();
    const std::size_t expected = mode == FeatureMode::Frame ? kFrameFeatureCount : kBlockFeatureCount;
    if (entries.size() != expected) throw std::logic_error("feature catalog has unexpected length");
    slot = std::make_unique<FeatureCatalog>(mode, config, std::move(entries));
  }
  return *slot;
}

const FeatureCatalog& frame_catalog(const FeatureConfig& config) { return catalog_for(FeatureMode::Frame, config); }
const FeatureCatalog& block_catalog(const FeatureConfig& config) { return catalog_for(FeatureMode::Block, config); }

std::vector<double> frame_features(const Frame& frame, const FeatureConfig& config) {
  config.validate();
  if (frame.width() < kFrameCropSize || frame.height() < kFrameCropSize) {
    throw ValidationError("frame_features: frame must be at least 412x412, got " + std::to_string(frame.width()) +
                          "x" + std::to_string(frame.height()));
  }
  const Image gray = crop_center(to_grayscale(frame), kFrameCropSize, kFrameCropSize);

  std::vector<double> out;
  out.reserve(kFrameFeatureCount);
  for (const auto& g : gabor_bank_method1(gray, config.gabor_coords)) {
    append_glcm(out, g.image, config.glcm_levels, 0);
    append_hu(out, g.image, config.hu_variant);
    append_stats(out, stats(g.image), 4);
  }
  const auto laws = laws_features(gray, kLawsTapFrame);
  out.insert(out.end(), laws.begin(), laws.end());
  for (int angle : kGlcmAngles) append_glcm(out, gray, config.glcm_levels, angle);
  append_hu(out, gray, config.hu_variant);
  check_length(out, kFrameFeatureCount, "frame_features");
  return out;
}

std::vector<double> block_features(const Frame& block, const FeatureConfig& config) {
  config.validate();
  if (block.width() != kBlockSize || block.height() != kBlockSize) {
    throw ValidationError("block_features: sub-image must be 32x32, got " + std::to_string(block.width()) + "x" +
                          std::to_string(block.height()));
  }
  const Image gray = to_grayscale(block);
  const Image red = channel_image(block, Channel::Red);
  const Image green = channel_image(block, Channel::Green);
  const Image blue = channel_image(block, Channel::Blue);
  const HsvPlanes hsv = to_hsv(block);

  std::vector<double> out;
  out.reserve(kBlockFeatureCount);
  const auto lbp1 = lbp::lbp1_pair(gray, green);
  const auto lbp2 = lbp::lbp2_features(gray);
  out.insert(out.end(), lbp1.begin(), lbp1.end());
  out.insert(out.end(), lbp2.begin(), lbp2.end());

  const StatSummary gray_stats = stats(gray);
  for (int angle : kGlcmAngles) {
    append_glcm(out, gray, config.glcm_levels, angle);
    out.push_back(gray_stats.mean);
  }
  const auto laws = laws_features(gray, kLawsTapBlock);
  out.insert(out.end(), laws.begin(), laws.end());
  for (const auto& g : gabor_bank_method2(gray, config.gabor_coords)) append_stats(out, stats(g.image), 5);
  for (const Image* channel : {&red, &green, &blue, &hsv.hue, &hsv.saturation, &gray}) {
    append_stats(out, stats(*channel), 4);
  }
  check_length(out, kBlockFeatureCount, "block_features");
  return out;
}

FeatureMatrix frame_block_features(const Frame& frame, const FeatureConfig& config) {
  const auto tiles = tile(frame, kBlockSize);
  FeatureMatrix out(tiles.size(), kBlockFeatureCount);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const auto row = block_features(tiles[i].image, config);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

Normalizer Normalizer::fit(const FeatureMatrix& x) {
  if (x.rows() == 0 || x.cols() == 0) throw ValidationError("Normalizer::fit: empty matrix");
  Normalizer n;
  n.min.assign(x.row(0).begin(), x.row(0).end());
  n.max = n.min;
  for (std::size_t r = 1; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      n.min[j] = std::min(n.min[j], row[j]);
      n.max[j] = std::max(n.max[j], row[j]);
    }
  }
  return n;
}

std::vector<double> Normalizer::apply(std::span<const double> row) const {
  if (row.size() != min.size()) {
    throw ValidationError("Normalizer: row has " + std::to_string(row.size()) + " values, expected " +
                          std::to_string(min.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double span = max[j] - min[j];
    out[j] = span > 0.0 ? std::clamp((row[j] - min[j]) / span, 0.0, 1.0) : 0.0;
  }
  return out;
}

FeatureMatrix Normalizer::apply(const FeatureMatrix& x) const {
  FeatureMatrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto v = apply(x.row(r));
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

double classify_row(std::span<const double> raw_row, const Normalizer& normalizer, const ClassNetwork& network) {
  const auto normalized = normalizer.apply(raw_row);
  if (network.selected.size() != static_cast<std::size_t>(network.model.input_size())) {
    throw ValidationError("network selection does not match its input layer");
  }
  std::vector<double> input(network.selected.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (network.selected[i] >= normalized.size()) throw ValidationError("network selects a column outside the catalog");
    input[i] = normalized[network.selected[i]];
  }
  return mlp_predict(network.model, input);
}

std::vector<SegmentationResult> segment_blocks(const FeatureMatrix& block_rows, int grid_rows, int grid_cols,
                                               const Normalizer& normalizer,
                                               std::span<const ClassNetwork> networks, MedianTarget median_target) {
  if (grid_rows < 1 || grid_cols < 1 || block_rows.rows() != static_cast<std::size_t>(grid_rows) * grid_cols) {
    throw ValidationError("segment_blocks: row count does not match the block grid");
  }
  std::vector<SegmentationResult> results;
  for (const ClassNetwork& net : networks) {
    SegmentationResult res;
    res.target = net.target;
    res.probability = ProbabilityGrid(grid_cols, grid_rows);
    res.raw = LabelGrid(grid_cols, grid_rows);
    for (int r = 0; r < grid_rows; ++r) {
      for (int c = 0; c < grid_cols; ++c) {
        const double p = classify_row(block_rows.row(static_cast<std::size_t>(r) * grid_cols + c), normalizer, net);
        res.probability(c, r) = p;
        res.raw(c, r) = p >= kDecisionThreshold ? 1 : 0;
      }
    }
    if (median_target == MedianTarget::Blocks) {
      res.smoothed = median_filter(res.raw, kMedianWindow);
      res.mask = replicate_blocks(res.smoothed, kBlockSize);
    } else {
      res.mask = median_filter(replicate_blocks(res.raw, kBlockSize), kMedianWindow);
      res.smoothed = LabelGrid(grid_cols, grid_rows);
      for (const auto& t : tile(res.mask, kBlockSize)) {
        const auto on = std::count(t.image.values().begin(), t.image.values().end(), std::uint8_t{1});
        res.smoothed(t.col, t.row) = 2 * on >= kBlockSize * kBlockSize ? 1 : 0;
      }
    }
    results.push_back(std::move(res));
  }
  return results;
}

std::vector<SegmentationResult> segment_frame(const Frame& frame, const FeatureConfig& config,
                                              const Normalizer& normalizer, std::span<const ClassNetwork> networks,
                                              MedianTarget median_target) {
  if (normalizer.size() != kBlockFeatureCount) {
    throw ValidationError("segment_frame: normalizer width does not match the block catalog");
  }
  const FeatureMatrix rows = frame_block_features(frame, config);
  return segment_blocks(rows, frame.height() / kBlockSize, frame.width() / kBlockSize, normalizer, networks,
                        median_target);
}

}  // namespace wcedetect
