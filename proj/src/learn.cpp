#include "wcedetect/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "wcedetect/random.hpp"

namespace wcedetect {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Clamped so that outputs stay strictly inside (0,1) even when exp underflows.
constexpr double kSigmoidLo = 0x1.0p-52;
constexpr double kSigmoidHi = 1.0 - 0x1.0p-52;

double sigmoid(double z) { return std::clamp(1.0 / (1.0 + std::exp(-z)), kSigmoidLo, kSigmoidHi); }

void check_binary(std::span<const int> labels) {
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
  }
}

Eigen::Map<const RowMatrix> as_eigen(const FeatureMatrix& x) {
  return {x.rows() == 0 ? nullptr : x.row(0).data(), static_cast<Eigen::Index>(x.rows()),
          static_cast<Eigen::Index>(x.cols())};
}

Eigen::Map<RowMatrix> weights_of(MlpLayer& layer) {
  return {layer.weights.data(), layer.outputs, layer.inputs};
}
Eigen::Map<const RowMatrix> weights_of(const MlpLayer& layer) {
  return {layer.weights.data(), layer.outputs, layer.inputs};
}

// Activations of every layer for a batch; acts[0] is the input.
std::vector<RowMatrix> forward_all(const MlpModel& model, const FeatureMatrix& x) {
  std::vector<RowMatrix> acts;
  acts.reserve(model.layers.size() + 1);
  acts.emplace_back(as_eigen(x));
  for (const auto& layer : model.layers) {
    const Eigen::Map<const Eigen::RowVectorXd> b(layer.biases.data(), layer.outputs);
    RowMatrix z = acts.back() * weights_of(layer).transpose();
    z.rowwise() += b;
    acts.push_back(z.unaryExpr([](double v) { return sigmoid(v); }));
  }
  return acts;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt_opt(const std::optional<double>& v, int precision) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, *v);
  return buf;
}

}  // namespace

FisherRanking fisher_scores(const FeatureMatrix& x, std::span<const int> labels) {
  if (labels.size() != x.rows()) throw ValidationError("fisher_scores: label count mismatch");
  check_binary(labels);
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("fisher_scores: both classes must be present");

  FisherRanking out;
  out.scores.resize(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double sum[2] = {0, 0};
    for (std::size_t r = 0; r < x.rows(); ++r) sum[labels[r]] += x(r, j);
    const double mean[2] = {sum[0] / n_neg, sum[1] / n_pos};
    double ss[2] = {0, 0};
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double d = x(r, j) - mean[labels[r]];
      ss[labels[r]] += d * d;
    }
    const double within = ss[0] / n_neg + ss[1] / n_pos;
    const double gap = (mean[1] - mean[0]) * (mean[1] - mean[0]);
    if (within > 0.0) {
      out.scores[j] = gap / within;
    } else {
      out.scores[j] = gap > 0.0 ? kFisherInfinity : 0.0;
    }
  }
  out.order.resize(x.cols());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return out.scores[a] > out.scores[b]; });
  return out;
}

std::vector<std::size_t> select_top_k(const FisherRanking& ranking, std::size_t k) {
  if (k > ranking.order.size()) {
    throw ValidationError("select_top_k: k = " + std::to_string(k) + " exceeds feature count " +
                          std::to_string(ranking.order.size()));
  }
  return {ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(k)};
}

void MlpModel::validate() const {
  if (layer_sizes.size() < 2) throw ValidationError("MlpModel: need at least input and output layers");
  if (layer_sizes.back() != 1) throw ValidationError("MlpModel: output layer must have one unit");
  if (layers.size() + 1 != layer_sizes.size()) throw ValidationError("MlpModel: layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.inputs != layer_sizes[l] || layer.outputs != layer_sizes[l + 1] ||
        layer.weights.size() != static_cast<std::size_t>(layer.inputs) * layer.outputs ||
        layer.biases.size() != static_cast<std::size_t>(layer.outputs)) {
      throw ValidationError("MlpModel: inconsistent dimensions in layer " + std::to_string(l));
    }
  }
  if (activation != "sigmoid") throw ValidationError("MlpModel: unsupported activation " + activation);
}

MlpModel mlp_init(std::vector<int> layer_sizes, std::uint64_t seed) {
  for (int s : layer_sizes) {
    if (s < 1) throw ValidationError("mlp_init: layer sizes must be positive");
  }
  MlpModel m;
  m.layer_sizes = std::move(layer_sizes);
  m.seed = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    MlpLayer layer;
    layer.inputs = m.layer_sizes[l];
    layer.outputs = m.layer_sizes[l + 1];
    layer.weights.resize(static_cast<std::size_t>(layer.inputs) * layer.outputs);
    layer.biases.resize(layer.outputs);
    for (double& w : layer.weights) w = rng.uniform(-0.5, 0.5);
    for (double& b : layer.biases) b = rng.uniform(-0.5, 0.5);
    m.layers.push_back(std::move(layer));
  }
  m.validate();
  return m;
}

MlpModel mlp_train(const FeatureMatrix& x, std::span<const int> labels, const MlpTrainConfig& config,
                   std::vector<double>* loss_history) {
  if (labels.size() != x.rows()) throw ValidationError("mlp_train: label count mismatch");
  if (x.rows() == 0) throw ValidationError("mlp_train: empty training set");
  check_binary(labels);
  if (config.epochs < 0 || !(config.learning_rate > 0.0)) {
    throw ValidationError("mlp_train: epochs must be >= 0 and learning rate > 0");
  }

  std::vector<int> sizes{static_cast<int>(x.cols())};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  MlpModel model = mlp_init(sizes, config.seed);

  const double n = static_cast<double>(x.rows());
  Eigen::VectorXd y(x.rows());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i];

  double mse = 0.0;
  for (int epoch = 0;; ++epoch) {
    const auto acts = forward_all(model, x);
    const Eigen::VectorXd out = acts.back().col(0);
    const Eigen::VectorXd err = out - y;
    mse = err.squaredNorm() / n;
    if (loss_history) loss_history->push_back(mse);
    if (epoch == config.epochs || mse < config.target_mse) {
      model.epochs_run = epoch;
      break;
    }

    RowMatrix delta = ((2.0 / n) * err.array() * out.array() * (1.0 - out.array())).matrix();
    for (std::size_t l = model.layers.size(); l-- > 0;) {
      MlpLayer& layer = model.layers[l];
      const RowMatrix grad_w = delta.transpose() * acts[l];
      const Eigen::RowVectorXd grad_b = delta.colwise().sum();
      if (l > 0) {
        delta = ((delta * weights_of(layer)).array() * acts[l].array() * (1.0 - acts[l].array())).matrix();
      }
      weights_of(layer) -= config.learning_rate * grad_w;
      Eigen::Map<Eigen::RowVectorXd>(layer.biases.data(), layer.outputs) -= config.learning_rate * grad_b;
    }
  }
  model.final_mse = mse;
  return model;
}

double mlp_predict(const MlpModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.input_size()) {
    throw ValidationError("mlp_predict: input has " + std::to_string(x.size()) + " values, model expects " +
                          std::to_string(model.input_size()));
  }
  std::vector<double> a(x.begin(), x.end());
  for (const auto& layer : model.layers) {
    std::vector<double> next(layer.outputs);
    for (int o = 0; o < layer.outputs; ++o) {
      double z = layer.biases[o];
      const double* w = &layer.weights[static_cast<std::size_t>(o) * layer.inputs];
      for (int i = 0; i < layer.inputs; ++i) z += w[i] * a[i];
      next[o] = sigmoid(z);
    }
    a = std::move(next);
  }
  return a.front();
}

std::vector<double> mlp_predict(const MlpModel& model, const FeatureMatrix& x) {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = mlp_predict(model, x.row(r));
  return out;
}

double mlp_mse(const MlpModel& model, const FeatureMatrix& x, std::span<const int> labels) {
  if (labels.size() != x.rows() || x.rows() == 0) throw ValidationError("mlp_mse: bad dimensions");
  double acc = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double e = mlp_predict(model, x.row(r)) - labels[r];
    acc += e * e;
  }
  return acc / static_cast<double>(x.rows());
}

EvalReport evaluate(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw ValidationError("evaluate: length mismatch");
  if (labels.empty()) throw ValidationError("evaluate: empty input");
  check_binary(predictions);
  check_binary(labels);
  EvalReport r;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      (predictions[i] == 1 ? r.tp : r.fn)++;
    } else {
      (predictions[i] == 1 ? r.fp : r.tn)++;
    }
  }
  r.sensitivity = ratio(r.tp, r.tp + r.fn);
  r.specificity = ratio(r.tn, r.tn + r.fp);
  r.accuracy = ratio(r.tp + r.tn, labels.size());
  r.precision = ratio(r.tp, r.tp + r.fp);
  return r;
}

std::string format_report(const EvalReport& r, const std::string& title) {
  std::ostringstream os;
  os << title << '\n'
     << "  TP " << r.tp << "  FP " << r.fp << "  TN " << r.tn << "  FN " << r.fn << '\n'
     << "  sensitivity " << fmt_opt(r.sensitivity, 4) << '\n'
     << "  specificity " << fmt_opt(r.specificity, 4) << '\n'
     << "  accuracy    " << fmt_opt(r.accuracy, 4) << '\n'
     << "  precision   " << fmt_opt(r.precision, 4) << '\n';
  return os.str();
}

std::string report_csv_header() { return "name,tp,fp,tn,fn,sensitivity,specificity,accuracy,precision"; }

std::string report_csv_row(const std::string& name, const EvalReport& r) {
  const auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  std::ostringstream os;
  os << name << ',' << r.tp << ',' << r.fp << ',' << r.tn << ',' << r.fn << ',' << cell(r.sensitivity) << ','
     << cell(r.specificity) << ',' << cell(r.accuracy) << ',' << cell(r.precision);
  return os.str();
}

std::set<std::string> grouped_split(std::span<const std::string> groups, std::span<const int> strata,
                                    double test_fraction, std::uint64_t seed) {
  if (groups.size() != strata.size()) throw ValidationError("grouped_split: length mismatch");
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw ValidationError("grouped_split: test fraction must be in [0,1)");
  }
  std::map<int, std::set<std::string>> by_stratum;
  std::map<std::string, int> first_stratum;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto [it, inserted] = first_stratum.emplace(groups[i], strata[i]);
    by_stratum[it->second].insert(groups[i]);
  }
  std::set<std::string> test;
  for (const auto& [stratum, members] : by_stratum) {
    std::vector<std::string> pool(members.begin(), members.end());
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(stratum)));
    rng.shuffle(std::span<std::string>(pool));
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(pool.size())));
    if (test_fraction > 0.0 && pool.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, pool.size() - 1);
    test.insert(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_test));
  }
  return test;
}

std::vector<std::size_t> balance_rows(std::span<const int> labels, double negative_ratio, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  const auto cap = static_cast<std::size_t>(std::llround(negative_ratio * static_cast<double>(pos.size())));
  if (negative_ratio > 0.0 && neg.size() > cap && !pos.empty()) {
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(neg));
    neg.resize(cap);
  }
  std::vector<std::size_t> out = pos;
  out.insert(out.end(), neg.begin(), neg.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SweepRow> feature_sweep(const TrainTestSplit& data, std::span<const std::size_t> k_list,
                                    const MlpTrainConfig& config, std::uint64_t seed) {
  const FisherRanking ranking = fisher_scores(data.train_x, data.train_y);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    const auto selected = select_top_k(ranking, k_list[i]);
    MlpTrainConfig cfg = config;
    cfg.seed = derive_seed(seed, i);
    const MlpModel model = mlp_train(data.train_x.select_cols(selected), data.train_y, cfg);
    const auto probs = mlp_predict(model, data.test_x.select_cols(selected));
    std::vector<int> preds(probs.size());
    std::transform(probs.begin(), probs.end(), preds.begin(),
                   [](double p) { return p >= kDecisionThreshold ? 1 : 0; });
    rows.push_back({k_list[i], evaluate(preds, data.test_y)});
  }
  return rows;
}

std::string format_sweep(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "Number of features | Sensitivity | Specificity\n";
  for (const auto& r : rows) {
    char line[96];
    std::snprintf(line, sizeof(line), "%18zu | %11s | %11s\n", r.k, fmt_opt(r.report.sensitivity, 4).c_str(),
                  fmt_opt(r.report.specificity, 4).c_str());
    os << line;
  }
  return os.str();
}

}  // namespace wcedetect
