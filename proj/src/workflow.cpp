#include "wcedetect/workflow.hpp"

#include <algorithm>
#include <unordered_map>

#include "wcedetect/image_io.hpp"
#include "wcedetect/random.hpp"

namespace wcedetect {
namespace {

using RecordIndex = std::unordered_map<std::string, const ManifestRecord*>;

RecordIndex index_records(std::span<const ManifestRecord> records) {
  RecordIndex index;
  for (const auto& r : records) {
    if (!index.emplace(r.id, &r).second) throw DataError("manifest: duplicate frame id '" + r.id + "'");
  }
  return index;
}

const ManifestRecord& record_of(const RecordIndex& index, const std::string& sample_id) {
  const auto it = index.find(frame_id_of(sample_id));
  if (it == index.end()) throw DataError("sample '" + sample_id + "' has no manifest record");
  return *it->second;
}

void require_dataset(const LabeledDataset& data, FeatureMode mode, const FeatureConfig& config) {
  if (data.mode != to_string(mode)) {
    throw DataError("feature matrix is in '" + data.mode + "' mode, expected '" + std::string(to_string(mode)) + "'");
  }
  const auto& catalog = catalog_for(mode, config);
  if (data.catalog_hash != catalog.hash()) {
    throw DataError("feature matrix catalog " + data.catalog_hash + " does not match the configured catalog " +
                    catalog.hash());
  }
  if (data.features.cols() != catalog.size()) throw DataError("feature matrix width does not match its catalog");
}

std::vector<int> binary_labels(const LabeledDataset& data, std::span<const std::size_t> rows, LesionClass target) {
  std::vector<int> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) y[i] = data.labels[rows[i]] == target ? 1 : 0;
  return y;
}

std::vector<std::size_t> drop_bleeding(const LabeledDataset& data, std::vector<std::size_t> rows) {
  std::erase_if(rows, [&](std::size_t r) { return data.labels[r] == LesionClass::Bleeding; });
  return rows;
}

ClassNetwork fit_network(const FeatureMatrix& x, std::span<const int> y, LesionClass target, std::size_t k,
                         const MlpTrainConfig& config) {
  ClassNetwork net;
  net.target = target;
  net.selected = select_top_k(fisher_scores(x, y), k);
  net.model = mlp_train(x.select_cols(net.selected), y, config);
  return net;
}

std::size_t class_index(LesionClass c) { return static_cast<std::size_t>(c); }

}  // namespace

LabelGrid load_block_truth(const ManifestRecord& record, int grid_rows, int grid_cols) {
  const LabelGrid mask = read_mask(record.mask);
  if (mask.width() == grid_cols && mask.height() == grid_rows) return mask;
  if (mask.width() == grid_cols * kBlockSize && mask.height() == grid_rows * kBlockSize) {
    LabelGrid grid(grid_cols, grid_rows);
    for (const auto& t : tile(mask, kBlockSize)) {
      const auto on = std::count(t.image.values().begin(), t.image.values().end(), std::uint8_t{1});
      grid(t.col, t.row) = 2 * on >= kBlockSize * kBlockSize ? 1 : 0;
    }
    return grid;
  }
  throw DataError(record.mask.string() + ": mask is " + std::to_string(mask.width()) + "x" +
                  std::to_string(mask.height()) + ", expected the block grid or the frame size");
}

LabeledDataset extract_dataset(std::span<const ManifestRecord> records, FeatureMode mode,
                               const FeatureConfig& config) {
  const FeatureCatalog& catalog = catalog_for(mode, config);
  LabeledDataset ds;
  ds.mode = std::string(to_string(mode));
  ds.catalog_hash = catalog.hash();
  ds.tags = catalog.tags();
  ds.features = FeatureMatrix(0, catalog.size());
  for (const auto& rec : records) {
    const Frame frame = read_frame(rec.image);
    if (mode == FeatureMode::Frame) {
      ds.append(rec.id, rec.label, frame_features(frame, config));
      continue;
    }
    check_tileable(frame.width(), frame.height(), kBlockSize);
    const int rows = frame.height() / kBlockSize;
    const int cols = frame.width() / kBlockSize;
    const LabelGrid truth = load_block_truth(rec, rows, cols);
    const FeatureMatrix blocks = frame_block_features(frame, config);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const LesionClass label = truth(c, r) ? rec.label : LesionClass::Normal;
        ds.append(block_sample_id(rec.id, r, c), label, blocks.row(static_cast<std::size_t>(r) * cols + c));
      }
    }
  }
  return ds;
}

MlpTrainConfig mlp_config_for(FeatureMode mode, const TrainOptions& options) {
  MlpTrainConfig cfg;
  if (mode == FeatureMode::Frame) {
    cfg.hidden = {20};
    cfg.epochs = 2000;
    cfg.learning_rate = 1.0;
  } else {
    cfg.hidden = {30, 20, 10};
    cfg.epochs = 1500;
    cfg.learning_rate = 2.0;
  }
  if (!options.hidden.empty()) cfg.hidden = options.hidden;
  if (options.epochs > 0) cfg.epochs = options.epochs;
  if (options.learning_rate > 0) cfg.learning_rate = options.learning_rate;
  cfg.seed = options.seed;
  return cfg;
}

std::set<std::string> choose_test_patients(std::span<const ManifestRecord> records, double test_fraction,
                                           std::uint64_t seed) {
  std::vector<std::string> groups;
  std::vector<int> strata;
  for (const auto& r : records) {
    groups.push_back(r.patient);
    strata.push_back(static_cast<int>(r.label));
  }
  return grouped_split(groups, strata, test_fraction, seed);
}

std::vector<std::size_t> rows_for_patients(const LabeledDataset& data, std::span<const ManifestRecord> records,
                                           const std::set<std::string>& patients, bool invert) {
  const RecordIndex index = index_records(records);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.sample_ids.size(); ++i) {
    const bool member = patients.contains(record_of(index, data.sample_ids[i]).patient);
    if (member != invert) rows.push_back(i);
  }
  return rows;
}

ModelBundle train_model(const LabeledDataset& data, std::span<const ManifestRecord> records,
                        const FeatureConfig& config, const TrainOptions& options) {
  const FeatureMode mode = parse_feature_mode(data.mode);
  require_dataset(data, mode, config);

  ModelBundle bundle;
  bundle.mode = mode;
  bundle.config = config;
  bundle.catalog_hash = data.catalog_hash;
  bundle.seed = options.seed;
  const auto test = choose_test_patients(records, options.test_fraction, derive_seed(options.seed, 1));
  bundle.test_patients.assign(test.begin(), test.end());

  auto train_rows = rows_for_patients(data, records, test, /*invert=*/true);
  if (mode == FeatureMode::Frame) train_rows = drop_bleeding(data, std::move(train_rows));
  if (train_rows.empty()) throw DataError("no training rows after the patient split");

  const FeatureMatrix raw = data.features.select_rows(train_rows);
  bundle.normalizer = Normalizer::fit(raw);
  const FeatureMatrix x = bundle.normalizer.apply(raw);
  MlpTrainConfig cfg = mlp_config_for(mode, options);

  if (mode == FeatureMode::Frame) {
    const auto y = binary_labels(data, train_rows, LesionClass::Tumor);
    cfg.seed = derive_seed(options.seed, 2);
    bundle.networks.push_back(fit_network(x, y, LesionClass::Tumor, options.k, cfg));
    return bundle;
  }

  for (LesionClass target : kLesionClasses) {
    const auto y_all = binary_labels(data, train_rows, target);
    const auto keep = balance_rows(y_all, options.negative_ratio, derive_seed(options.seed, 10 + class_index(target)));
    std::vector<int> y(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) y[i] = y_all[keep[i]];
    cfg.seed = derive_seed(options.seed, 20 + class_index(target));
    bundle.networks.push_back(fit_network(x.select_rows(keep), y, target, options.k, cfg));
  }
  return bundle;
}

std::vector<FrameDecision> classify_frames(const ModelBundle& model, const LabeledDataset& data,
                                           std::span<const std::size_t> rows) {
  model.require_catalog(data.catalog_hash, "feature matrix");
  const ClassNetwork& net = model.network_for(LesionClass::Tumor);
  std::vector<FrameDecision> out;
  for (std::size_t r : rows) {
    const double p = classify_row(data.features.row(r), model.normalizer, net);
    out.push_back({data.sample_ids[r], data.labels[r], p, p >= kDecisionThreshold ? 1 : 0});
  }
  return out;
}

EvalReport evaluate_frames(const ModelBundle& model, const LabeledDataset& data,
                           std::span<const ManifestRecord> records, const std::set<std::string>& patients) {
  const auto rows = drop_bleeding(data, rows_for_patients(data, records, patients));
  if (rows.empty()) throw DataError("no frames to evaluate");
  std::vector<int> preds, truth;
  for (const auto& d : classify_frames(model, data, rows)) {
    preds.push_back(d.predicted);
    truth.push_back(d.truth == LesionClass::Tumor ? 1 : 0);
  }
  return evaluate(preds, truth);
}

std::vector<ClassReport> evaluate_blocks(const ModelBundle& model, const LabeledDataset& data,
                                         std::span<const ManifestRecord> records,
                                         const std::set<std::string>& patients, MedianTarget median_target) {
  model.require_catalog(data.catalog_hash, "feature matrix");
  const auto rows = rows_for_patients(data, records, patients);
  if (rows.empty()) throw DataError("no blocks to evaluate");

  // Rows of one frame are contiguous in extraction order; group defensively anyway.
  std::vector<std::string> frame_order;
  std::unordered_map<std::string, std::vector<std::size_t>> by_frame;
  for (std::size_t r : rows) {
    const std::string id = frame_id_of(data.sample_ids[r]);
    auto [it, inserted] = by_frame.try_emplace(id);
    if (inserted) frame_order.push_back(id);
    it->second.push_back(r);
  }

  std::vector<std::vector<int>> preds(model.networks.size()), truth(model.networks.size());
  for (const auto& id : frame_order) {
    const auto& frame_rows = by_frame[id];
    int grid_rows = 0, grid_cols = 0;
    for (std::size_t r : frame_rows) {
      const auto [br, bc] = block_position_of(data.sample_ids[r]);
      grid_rows = std::max(grid_rows, br + 1);
      grid_cols = std::max(grid_cols, bc + 1);
    }
    if (frame_rows.size() != static_cast<std::size_t>(grid_rows) * grid_cols) {
      throw DataError("frame '" + id + "' does not have a complete block grid");
    }
    FeatureMatrix grid(frame_rows.size(), data.features.cols());
    std::vector<LesionClass> labels(frame_rows.size());
    for (std::size_t r : frame_rows) {
      const auto [br, bc] = block_position_of(data.sample_ids[r]);
      const std::size_t slot = static_cast<std::size_t>(br) * grid_cols + bc;
      std::copy(data.features.row(r).begin(), data.features.row(r).end(), grid.row(slot).begin());
      labels[slot] = data.labels[r];
    }
    const auto results = segment_blocks(grid, grid_rows, grid_cols, model.normalizer, model.networks, median_target);
    for (std::size_t n = 0; n < results.size(); ++n) {
      for (int br = 0; br < grid_rows; ++br) {
        for (int bc = 0; bc < grid_cols; ++bc) {
          preds[n].push_back(results[n].smoothed(bc, br));
          truth[n].push_back(labels[static_cast<std::size_t>(br) * grid_cols + bc] == results[n].target ? 1 : 0);
        }
      }
    }
  }
  std::vector<ClassReport> out;
  for (std::size_t n = 0; n < model.networks.size(); ++n) {
    out.push_back({model.networks[n].target, evaluate(preds[n], truth[n])});
  }
  return out;
}

std::vector<SweepRow> run_sweep(const LabeledDataset& data, std::span<const ManifestRecord> records,
                                std::span<const std::size_t> k_list, const TrainOptions& options,
                                LesionClass block_target) {
  const FeatureMode mode = parse_feature_mode(data.mode);
  const auto test = choose_test_patients(records, options.test_fraction, derive_seed(options.seed, 1));
  auto train_rows = rows_for_patients(data, records, test, true);
  auto test_rows = rows_for_patients(data, records, test, false);
  const LesionClass target = mode == FeatureMode::Frame ? LesionClass::Tumor : block_target;
  if (mode == FeatureMode::Frame) {
    train_rows = drop_bleeding(data, std::move(train_rows));
    test_rows = drop_bleeding(data, std::move(test_rows));
  } else {
    const auto y_all = binary_labels(data, train_rows, target);
    const auto keep = balance_rows(y_all, options.negative_ratio, derive_seed(options.seed, 10 + class_index(target)));
    std::vector<std::size_t> kept;
    for (std::size_t i : keep) kept.push_back(train_rows[i]);
    train_rows = std::move(kept);
  }
  if (train_rows.empty() || test_rows.empty()) throw DataError("sweep: empty training or test side");

  const FeatureMatrix raw_train = data.features.select_rows(train_rows);
  const Normalizer norm = Normalizer::fit(raw_train);
  TrainTestSplit split;
  split.train_x = norm.apply(raw_train);
  split.train_y = binary_labels(data, train_rows, target);
  split.test_x = norm.apply(data.features.select_rows(test_rows));
  split.test_y = binary_labels(data, test_rows, target);
  return feature_sweep(split, k_list, mlp_config_for(mode, options), derive_seed(options.seed, 3));
}

double balanced_accuracy(const EvalReport& r) {
  return 0.5 * (r.sensitivity.value_or(0.0) + r.specificity.value_or(0.0));
}

}  // namespace wcedetect
