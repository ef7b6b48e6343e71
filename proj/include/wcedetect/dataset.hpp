#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wcedetect/errors.hpp"

namespace wcedetect {

enum class LesionClass { Normal = 0, Tumor = 1, Bleeding = 2, Disease = 3 };

inline constexpr LesionClass kLesionClasses[] = {LesionClass::Tumor, LesionClass::Bleeding,
                                                 LesionClass::Disease};

std::string_view to_string(LesionClass c);
LesionClass parse_lesion_class(std::string_view s);

/// Dense row-major sample x feature matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  /// The first appended row fixes the column count of an empty matrix.
  void append_row(std::span<const double> values);

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  FeatureMatrix select_cols(std::span<const std::size_t> cols) const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A persisted feature matrix: one row per frame (frame mode) or per 32x32 block (block mode).
struct LabeledDataset {
  std::string mode;          // "frame" or "block"
  std::string catalog_hash;  // hash of the catalog that produced the columns
  std::vector<std::string> tags;
  std::vector<std::string> sample_ids;
  std::vector<LesionClass> labels;
  FeatureMatrix features;

  void append(std::string sample_id, LesionClass label, std::span<const double> row);
};

/// Block sample ids are "<frame id>:<row>:<col>"; frame ids contain no ':'.
std::string block_sample_id(std::string_view frame_id, int row, int col);
std::string frame_id_of(std::string_view sample_id);
std::pair<int, int> block_position_of(std::string_view sample_id);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

void write_feature_csv(std::ostream& os, const LabeledDataset& ds);
void write_feature_csv(const std::filesystem::path& path, const LabeledDataset& ds);
LabeledDataset read_feature_csv(std::istream& is, const std::string& source_name = "<stream>");
LabeledDataset read_feature_csv(const std::filesystem::path& path);

struct ManifestRecord {
  std::string id;
  std::filesystem::path image;  // absolute once loaded
  LesionClass label = LesionClass::Normal;
  std::string patient;
  std::filesystem::path mask;  // block-level ground truth, absolute once loaded
};

/// CSV with header "id,image,label,patient,mask"; paths are stored relative to the manifest.
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);
/// Resolves paths against the manifest directory and checks that each file exists.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// Reads a whole file; throws DataError naming the path if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace wcedetect
