#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wcedetect/dataset.hpp"
#include "wcedetect/learn.hpp"
#include "wcedetect/model_io.hpp"
#include "wcedetect/pipeline.hpp"

namespace wcedetect {

/// Block-level ground truth of one frame: the mask file is either a block grid or a
/// full-resolution mask (a block is positive when at least half its pixels are).
LabelGrid load_block_truth(const ManifestRecord& record, int grid_rows, int grid_cols);

/// Frame mode: one row per manifest record. Block mode: one row per 32x32 block, labeled
/// with the frame's class where the ground-truth grid is set and normal elsewhere.
LabeledDataset extract_dataset(std::span<const ManifestRecord> records, FeatureMode mode,
                               const FeatureConfig& config = {});

struct TrainOptions {
  std::size_t k = 30;
  /// Empty means the mode default: one hidden layer of 20 (frame), [30, 20, 10] (block).
  std::vector<int> hidden;
  int epochs = 0;             // 0 means the mode default
  double learning_rate = 0;   // 0 means the mode default
  double test_fraction = 0.25;
  /// Block mode: negatives kept per positive when training each class network.
  double negative_ratio = 2.0;
  std::uint64_t seed = 1;
};

/// Resolved training settings for a mode, with TrainOptions overrides applied.
MlpTrainConfig mlp_config_for(FeatureMode mode, const TrainOptions& options);

/// Patients held out for testing, chosen per frame class.
std::set<std::string> choose_test_patients(std::span<const ManifestRecord> records, double test_fraction,
                                           std::uint64_t seed);

/// Frame mode trains a tumor-vs-rest network on non-bleeding frames. Block mode trains
/// one network per lesion class (class blocks against all other blocks).
ModelBundle train_model(const LabeledDataset& data, std::span<const ManifestRecord> records,
                        const FeatureConfig& config, const TrainOptions& options);

/// Rows of `data` whose frame belongs (or, with `invert`, does not belong) to `patients`.
std::vector<std::size_t> rows_for_patients(const LabeledDataset& data, std::span<const ManifestRecord> records,
                                           const std::set<std::string>& patients, bool invert = false);

struct FrameDecision {
  std::string frame_id;
  LesionClass truth = LesionClass::Normal;
  double probability = 0.0;
  int predicted = 0;
};

/// Tumor probability for each selected row of a frame-mode dataset.
std::vector<FrameDecision> classify_frames(const ModelBundle& model, const LabeledDataset& data,
                                           std::span<const std::size_t> rows);

struct ClassReport {
  LesionClass target = LesionClass::Tumor;
  EvalReport report;
};

/// Frame mode: tumor vs non-tumor over non-bleeding frames of the selected patients.
EvalReport evaluate_frames(const ModelBundle& model, const LabeledDataset& data,
                           std::span<const ManifestRecord> records, const std::set<std::string>& patients);

/// Block mode: per class, smoothed block decisions against block truth over every frame of
/// the selected patients.
std::vector<ClassReport> evaluate_blocks(const ModelBundle& model, const LabeledDataset& data,
                                         std::span<const ManifestRecord> records,
                                         const std::set<std::string>& patients,
                                         MedianTarget median_target = MedianTarget::Blocks);

/// Splits by patient, normalizes on the training side and runs feature_sweep. Frame mode
/// targets tumor frames; block mode targets `block_target` blocks without smoothing.
std::vector<SweepRow> run_sweep(const LabeledDataset& data, std::span<const ManifestRecord> records,
                                std::span<const std::size_t> k_list, const TrainOptions& options,
                                LesionClass block_target = LesionClass::Tumor);

/// Mean of sensitivity and specificity; absent ratios count as 0.
double balanced_accuracy(const EvalReport& r);

}  // namespace wcedetect
