#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wcedetect/dataset.hpp"

namespace wcedetect {

// --- Fisher ranking -------------------------------------------------------

/// Stand-in for an infinite score (zero within-class variance, distinct means).
inline constexpr double kFisherInfinity = 1e300;

struct FisherRanking {
  std::vector<double> scores;
  /// Feature indices by descending score; ties keep the lower index first.
  std::vector<std::size_t> order;
};

/// Two-class Fisher ratio (mu_pos - mu_neg)^2 / (var_pos + var_neg) per column.
/// Labels are 0/1 and both classes must be present.
FisherRanking fisher_scores(const FeatureMatrix& x, std::span<const int> labels);

std::vector<std::size_t> select_top_k(const FisherRanking& ranking, std::size_t k);

// --- MLP ------------------------------------------------------------------

struct MlpLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> biases;
};

/// Fully connected sigmoid network with a single output.
struct MlpModel {
  std::vector<int> layer_sizes;
  std::vector<MlpLayer> layers;
  std::string activation = "sigmoid";
  std::uint64_t seed = 0;
  double final_mse = 0.0;
  int epochs_run = 0;

  int input_size() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
  void validate() const;
};

struct MlpTrainConfig {
  std::vector<int> hidden = {20};
  std::uint64_t seed = 1;
  int epochs = 2000;
  double learning_rate = 1.0;
  double target_mse = 1e-4;
};

/// Weights and biases drawn uniformly from [-0.5, 0.5].
MlpModel mlp_init(std::vector<int> layer_sizes, std::uint64_t seed);

/// Full-batch gradient descent on mean squared error. `loss_history`, when given,
/// receives the MSE before each update and the final MSE.
MlpModel mlp_train(const FeatureMatrix& x, std::span<const int> labels, const MlpTrainConfig& config,
                   std::vector<double>* loss_history = nullptr);

double mlp_predict(const MlpModel& model, std::span<const double> x);
std::vector<double> mlp_predict(const MlpModel& model, const FeatureMatrix& x);
double mlp_mse(const MlpModel& model, const FeatureMatrix& x, std::span<const int> labels);

inline constexpr double kDecisionThreshold = 0.5;

// --- Metrics --------------------------------------------------------------

struct EvalReport {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  // Absent when the denominator is zero.
  std::optional<double> sensitivity, specificity, accuracy, precision;
};

EvalReport evaluate(std::span<const int> predictions, std::span<const int> labels);

/// Human-readable block, one metric per line.
std::string format_report(const EvalReport& r, const std::string& title);
/// "name,tp,fp,tn,fn,sensitivity,specificity,accuracy,precision"; absent ratios are empty.
std::string report_csv_header();
std::string report_csv_row(const std::string& name, const EvalReport& r);

// --- Split, balancing, sweep ----------------------------------------------

/// Picks whole groups for the test side, per stratum: round(fraction * groups),
/// at least one when a stratum has two or more groups.
std::set<std::string> grouped_split(std::span<const std::string> groups, std::span<const int> strata,
                                    double test_fraction, std::uint64_t seed);

/// All positive rows plus a deterministic subsample of at most ratio * positives negatives,
/// returned in ascending row order.
std::vector<std::size_t> balance_rows(std::span<const int> labels, double negative_ratio,
                                      std::uint64_t seed);

struct TrainTestSplit {
  FeatureMatrix train_x;
  std::vector<int> train_y;
  FeatureMatrix test_x;
  std::vector<int> test_y;
};

struct SweepRow {
  std::size_t k = 0;
  EvalReport report;
};

/// For each k: top-k Fisher features on the training side, a fresh MLP (seed derived
/// from `seed` and the position of k), evaluation on the test side.
std::vector<SweepRow> feature_sweep(const TrainTestSplit& data, std::span<const std::size_t> k_list,
                                    const MlpTrainConfig& config, std::uint64_t seed);

std::string format_sweep(const std::vector<SweepRow>& rows);

}  // namespace wcedetect
