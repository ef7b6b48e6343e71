#include "wcedetect/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace wcedetect {
namespace {

constexpr std::string_view kFeatureMagic = "# wcedetect-features v1";
constexpr std::string_view kManifestHeader = "id,image,label,patient,mask";

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(where + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::string header_value(std::string_view header, std::string_view key) {
  const std::string needle = " " + std::string(key) + "=";
  const auto pos = header.find(needle);
  if (pos == std::string_view::npos) return {};
  const auto begin = pos + needle.size();
  const auto end = header.find(' ', begin);
  return std::string(header.substr(begin, end == std::string_view::npos ? std::string_view::npos : end - begin));
}

}  // namespace

std::string_view to_string(LesionClass c) {
  switch (c) {
    case LesionClass::Normal: return "normal";
    case LesionClass::Tumor: return "tumor";
    case LesionClass::Bleeding: return "bleeding";
    case LesionClass::Disease: return "disease";
  }
  return "normal";
}

LesionClass parse_lesion_class(std::string_view s) {
  if (s == "normal") return LesionClass::Normal;
  if (s == "tumor") return LesionClass::Tumor;
  if (s == "bleeding") return LesionClass::Bleeding;
  if (s == "disease") return LesionClass::Disease;
  throw DataError("unknown class label '" + std::string(s) + "'");
}

void FeatureMatrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw ValidationError("FeatureMatrix: row width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  FeatureMatrix out(rows.size(), cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= rows_) throw ValidationError("FeatureMatrix: row index out of range");
    std::copy(row(rows[i]).begin(), row(rows[i]).end(), out.row(i).begin());
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_cols(std::span<const std::size_t> cols) const {
  for (auto c : cols) {
    if (c >= cols_) throw ValidationError("FeatureMatrix: column index out of range");
  }
  FeatureMatrix out(rows_, cols.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(r, j) = (*this)(r, cols[j]);
  }
  return out;
}

void LabeledDataset::append(std::string sample_id, LesionClass label, std::span<const double> row) {
  features.append_row(row);
  sample_ids.push_back(std::move(sample_id));
  labels.push_back(label);
}

std::string block_sample_id(std::string_view frame_id, int row, int col) {
  return std::string(frame_id) + ":" + std::to_string(row) + ":" + std::to_string(col);
}

std::string frame_id_of(std::string_view sample_id) {
  return std::string(sample_id.substr(0, sample_id.find(':')));
}

std::pair<int, int> block_position_of(std::string_view sample_id) {
  const auto parts = split(sample_id, ':');
  if (parts.size() != 3) throw DataError("not a block sample id: " + std::string(sample_id));
  return {std::stoi(parts[1]), std::stoi(parts[2])};
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_feature_csv(std::ostream& os, const LabeledDataset& ds) {
  if (ds.tags.size() != ds.features.cols() && !ds.features.empty()) {
    throw ValidationError("write_feature_csv: tag count does not match feature width");
  }
  os << kFeatureMagic << " mode=" << ds.mode << " catalog=" << ds.catalog_hash << '\n';
  os << "sample_id,label";
  for (const auto& t : ds.tags) os << ',' << t;
  os << '\n';
  for (std::size_t r = 0; r < ds.features.rows(); ++r) {
    os << ds.sample_ids[r] << ',' << to_string(ds.labels[r]);
    for (double v : ds.features.row(r)) os << ',' << format_double(v);
    os << '\n';
  }
}

void write_feature_csv(const std::filesystem::path& path, const LabeledDataset& ds) {
  std::ostringstream os;
  write_feature_csv(os, ds);
  write_text_file(path, os.str());
}

LabeledDataset read_feature_csv(std::istream& is, const std::string& source_name) {
  std::string line;
  if (!std::getline(is, line) || !std::string_view(line).starts_with(kFeatureMagic)) {
    throw DataError(source_name + ": not a feature matrix file");
  }
  LabeledDataset ds;
  ds.mode = header_value(strip_cr(line), "mode");
  ds.catalog_hash = header_value(strip_cr(line), "catalog");
  if (!std::getline(is, line)) throw DataError(source_name + ": missing column header");
  auto header = split(strip_cr(line), ',');
  if (header.size() < 2 || header[0] != "sample_id" || header[1] != "label") {
    throw DataError(source_name + ": bad column header");
  }
  ds.tags.assign(header.begin() + 2, header.end());
  std::size_t line_no = 2;
  std::vector<double> values(ds.tags.size());
  while (std::getline(is, line)) {
    ++line_no;
    if (strip_cr(line).empty()) continue;
    const auto cells = split(strip_cr(line), ',');
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (cells.size() != header.size()) throw DataError(where + ": wrong number of columns");
    for (std::size_t j = 0; j < values.size(); ++j) values[j] = parse_double(cells[j + 2], where);
    ds.append(cells[0], parse_lesion_class(cells[1]), values);
  }
  if (ds.features.empty()) ds.features = FeatureMatrix(0, ds.tags.size());
  return ds;
}

LabeledDataset read_feature_csv(const std::filesystem::path& path) {
  std::istringstream is(read_text_file(path));
  return read_feature_csv(is, path.string());
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
  const auto base = path.parent_path();
  std::ostringstream os;
  os << kManifestHeader << '\n';
  for (const auto& r : records) {
    const auto rel = [&](const std::filesystem::path& p) {
      return (p.is_absolute() && !base.empty() ? std::filesystem::relative(p, base) : p).generic_string();
    };
    os << r.id << ',' << rel(r.image) << ',' << to_string(r.label) << ',' << r.patient << ','
       << rel(r.mask) << '\n';
  }
  write_text_file(path, os.str());
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::istringstream is(read_text_file(path));
  std::string line;
  if (!std::getline(is, line) || strip_cr(line) != kManifestHeader) {
    throw DataError(path.string() + ": manifest header must be '" + std::string(kManifestHeader) + "'");
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  std::vector<ManifestRecord> records;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (strip_cr(line).empty()) continue;
    const auto cells = split(strip_cr(line), ',');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != 5) throw DataError(where + ": expected 5 columns");
    if (cells[0].empty() || cells[0].find(':') != std::string::npos) {
      throw DataError(where + ": frame id must be non-empty and contain no ':'");
    }
    ManifestRecord r{cells[0], base / cells[1], parse_lesion_class(cells[2]), cells[3], base / cells[4]};
    for (const auto* p : {&r.image, &r.mask}) {
      if (!std::filesystem::exists(*p)) throw DataError(where + ": missing file " + p->string());
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace wcedetect
