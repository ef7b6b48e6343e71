#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wcedetect/dataset.hpp"
#include "wcedetect/glcm.hpp"
#include "wcedetect/image_io.hpp"
#include "wcedetect/learn.hpp"
#include "wcedetect/model_io.hpp"
#include "wcedetect/pipeline.hpp"
#include "wcedetect/synth.hpp"
#include "wcedetect/workflow.hpp"

namespace fs = std::filesystem;
using namespace wcedetect;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitData = 3;

struct FeatureFlags {
  int levels = 16;
  std::string gabor_coords = "normalized";
  std::string hu_variant = "canonical";

  void attach(CLI::App* app) {
    app->add_option("--levels", levels, "GLCM quantization levels")->capture_default_str();
    app->add_option("--gabor-coords", gabor_coords, "Gabor kernel coordinates: normalized|pixel")
        ->capture_default_str();
    app->add_option("--hu-variant", hu_variant, "Hu invariant variant: canonical|paper")->capture_default_str();
  }
  FeatureConfig config() const {
    FeatureConfig c;
    c.glcm_levels = levels;
    c.gabor_coords = parse_gabor_coordinates(gabor_coords);
    c.hu_variant = parse_hu_variant(hu_variant);
    c.validate();
    return c;
  }
};

struct TrainFlags {
  std::size_t k = 30;
  std::string hidden;
  int epochs = 0;
  double lr = 0.0;
  double test_fraction = 0.25;
  double negative_ratio = 2.0;
  std::uint64_t seed = 1;

  void attach(CLI::App* app) {
    app->add_option("--k", k, "Number of Fisher-selected features")->capture_default_str();
    app->add_option("--hidden", hidden, "Hidden layer sizes, comma separated (default depends on mode)");
    app->add_option("--epochs", epochs, "Training epochs (0 = mode default)");
    app->add_option("--lr", lr, "Learning rate (0 = mode default)");
    app->add_option("--test-fraction", test_fraction, "Share of patients held out per class")->capture_default_str();
    app->add_option("--negative-ratio", negative_ratio, "Block mode: negatives kept per positive")
        ->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
  }
  TrainOptions options() const {
    TrainOptions o;
    o.k = k;
    o.epochs = epochs;
    o.learning_rate = lr;
    o.test_fraction = test_fraction;
    o.negative_ratio = negative_ratio;
    o.seed = seed;
    if (!hidden.empty()) {
      std::stringstream ss(hidden);
      std::string part;
      while (std::getline(ss, part, ',')) {
        try {
          o.hidden.push_back(std::stoi(part));
        } catch (const std::exception&) {
          throw ValidationError("--hidden expects comma-separated integers, got '" + hidden + "'");
        }
      }
    }
    return o;
  }
};

std::vector<std::size_t> parse_k_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(static_cast<std::size_t>(std::stoul(part)));
    } catch (const std::exception&) {
      throw ValidationError("--k-list expects comma-separated integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw ValidationError("--k-list is empty");
  return out;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

Rgb class_color(LesionClass c) {
  switch (c) {
    case LesionClass::Tumor: return {255, 220, 0};
    case LesionClass::Bleeding: return {0, 200, 255};
    case LesionClass::Disease: return {255, 0, 255};
    case LesionClass::Normal: break;
  }
  return {255, 255, 255};
}

// Positive blocks tinted at 40% and outlined in the class colour.
Frame overlay(const Frame& frame, const SegmentationResult& res) {
  Frame out = frame;
  const Rgb tint = class_color(res.target);
  const auto mix = [](std::uint8_t a, std::uint8_t b, double w) {
    return static_cast<std::uint8_t>(std::lround((1 - w) * a + w * b));
  };
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      if (!res.mask(x, y)) continue;
      const bool edge = x == 0 || y == 0 || x + 1 == frame.width() || y + 1 == frame.height() ||
                        !res.mask(x - 1, y) || !res.mask(x + 1, y) || !res.mask(x, y - 1) || !res.mask(x, y + 1);
      const Rgb p = frame.at(x, y);
      out.set(x, y, edge ? tint : Rgb{mix(p.r, tint.r, 0.4), mix(p.g, tint.g, 0.4), mix(p.b, tint.b, 0.4)});
    }
  }
  return out;
}

std::set<std::string> eval_patients(const ModelBundle& model, const std::vector<ManifestRecord>& records,
                                    bool all) {
  if (!all) return {model.test_patients.begin(), model.test_patients.end()};
  std::set<std::string> every;
  for (const auto& r : records) every.insert(r.patient);
  return every;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Texture-feature abnormality detection for capsule-endoscopy frames"};
  app.require_subcommand(1);

  // synth
  SynthConfig synth_cfg;
  fs::path synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labelled corpus");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_cfg.seed, "Random seed")->capture_default_str();
  synth->add_option("--frames-per-class", synth_cfg.frames_per_class)->capture_default_str();
  synth->add_option("--frames-per-patient", synth_cfg.frames_per_patient)->capture_default_str();

  // extract
  fs::path extract_manifest, extract_out;
  std::string extract_mode = "frame";
  FeatureFlags extract_flags;
  auto* extract = app.add_subcommand("extract", "Compute a feature matrix for a manifest");
  extract->add_option("--manifest", extract_manifest)->required();
  extract->add_option("--mode", extract_mode, "frame|block")->capture_default_str();
  extract->add_option("--out", extract_out, "Feature matrix CSV")->required();
  extract_flags.attach(extract);

  // train
  fs::path train_features, train_manifest, train_out;
  FeatureFlags train_feature_flags;
  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "Fit normalizer, Fisher selection and network(s)");
  train->add_option("--features", train_features)->required();
  train->add_option("--manifest", train_manifest, "Manifest providing patient ids")->required();
  train->add_option("--out", train_out, "Model file")->required();
  train_feature_flags.attach(train);
  train_flags.attach(train);

  // classify
  fs::path classify_model, classify_features, classify_manifest, classify_out;
  auto* classify = app.add_subcommand("classify", "Tumor probability per frame (frame-mode model)");
  classify->add_option("--model", classify_model)->required();
  auto* cf = classify->add_option("--features", classify_features, "Frame feature matrix");
  classify->add_option("--manifest", classify_manifest, "Manifest whose frames are featurized on the fly")
      ->excludes(cf);
  classify->add_option("--out", classify_out, "CSV output (default: stdout)");

  // segment
  fs::path segment_model, segment_manifest, segment_image, segment_out;
  std::string segment_median = "blocks";
  auto* segment = app.add_subcommand("segment", "Block segmentation masks and overlays (block-mode model)");
  segment->add_option("--model", segment_model)->required();
  auto* sm = segment->add_option("--manifest", segment_manifest);
  segment->add_option("--image", segment_image)->excludes(sm);
  segment->add_option("--out", segment_out, "Output directory")->required();
  segment->add_option("--median-target", segment_median, "blocks|pixels")->capture_default_str();

  // eval
  fs::path eval_model, eval_features, eval_manifest, eval_csv;
  bool eval_all = false;
  std::string eval_median = "blocks";
  auto* eval = app.add_subcommand("eval", "Evaluate a model on held-out (or all) patients");
  eval->add_option("--model", eval_model)->required();
  eval->add_option("--features", eval_features)->required();
  eval->add_option("--manifest", eval_manifest)->required();
  eval->add_flag("--all", eval_all, "Evaluate every patient instead of the held-out ones");
  eval->add_option("--median-target", eval_median, "blocks|pixels")->capture_default_str();
  eval->add_option("--csv", eval_csv, "Also write the report as CSV");

  // sweep
  fs::path sweep_features, sweep_manifest, sweep_csv;
  std::string sweep_k = "10,20,25,30,35,40";
  std::string sweep_class = "tumor";
  FeatureFlags sweep_feature_flags;
  TrainFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Sensitivity/specificity for several feature counts");
  sweep->add_option("--features", sweep_features)->required();
  sweep->add_option("--manifest", sweep_manifest)->required();
  sweep->add_option("--k-list", sweep_k)->capture_default_str();
  sweep->add_option("--class", sweep_class, "Block mode target class")->capture_default_str()
      ->check(CLI::IsMember({"tumor", "bleeding", "disease"}));
  sweep->add_option("--csv", sweep_csv, "Also write the sweep as CSV");
  sweep_feature_flags.attach(sweep);
  sweep_flags.attach(sweep);

  // catalog
  std::string catalog_mode = "frame";
  fs::path catalog_out;
  FeatureFlags catalog_flags;
  auto* catalog = app.add_subcommand("catalog", "Write the feature catalog as JSON");
  catalog->add_option("--mode", catalog_mode, "frame|block")->capture_default_str();
  catalog->add_option("--out", catalog_out, "Output file (default: stdout)");
  catalog_flags.attach(catalog);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*synth) {
      const auto records = write_synthetic_corpus(synth_cfg, synth_out);
      std::cout << "wrote " << records.size() << " frames to " << synth_out.string() << "\n";
    } else if (*extract) {
      const FeatureMode mode = parse_feature_mode(extract_mode);
      const auto records = read_manifest(extract_manifest);
      const auto ds = extract_dataset(records, mode, extract_flags.config());
      ensure_parent(extract_out);
      write_feature_csv(extract_out, ds);
      std::cout << "wrote " << ds.features.rows() << "x" << ds.features.cols() << " matrix to " << extract_out.string()
                << "\n";
      if (const auto failed = mcc_failure_count(); failed > 0) {
        std::cerr << "warning: maximum correlation coefficient did not converge for " << failed
                  << " co-occurrence matrices; those values were set to 0\n";
      }
    } else if (*train) {
      const auto data = read_feature_csv(train_features);
      const auto records = read_manifest(train_manifest);
      const auto bundle = train_model(data, records, train_feature_flags.config(), train_flags.options());
      ensure_parent(train_out);
      save_model(train_out, bundle);
      for (const auto& n : bundle.networks) {
        std::cout << to_string(n.target) << " network: final training MSE " << n.model.final_mse << " after "
                  << n.model.epochs_run << " epochs\n";
      }
    } else if (*classify) {
      const auto model = load_model(classify_model);
      if (model.mode != FeatureMode::Frame) throw ValidationError("classify needs a frame-mode model");
      LabeledDataset data;
      if (!classify_features.empty()) {
        data = read_feature_csv(classify_features);
      } else if (!classify_manifest.empty()) {
        model.require_catalog(frame_catalog(model.config).hash(), "this build's frame catalog");
        data = extract_dataset(read_manifest(classify_manifest), FeatureMode::Frame, model.config);
      } else {
        throw ValidationError("classify needs --features or --manifest");
      }
      std::vector<std::size_t> rows(data.features.rows());
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
      std::ostringstream os;
      os << "id,probability,tumor\n";
      for (const auto& d : classify_frames(model, data, rows)) {
        os << d.frame_id << ',' << format_double(d.probability) << ',' << d.predicted << '\n';
      }
      if (classify_out.empty()) {
        std::cout << os.str();
      } else {
        ensure_parent(classify_out);
        write_text_file(classify_out, os.str());
      }
    } else if (*segment) {
      const auto model = load_model(segment_model);
      if (model.mode != FeatureMode::Block) throw ValidationError("segment needs a block-mode model");
      model.require_catalog(block_catalog(model.config).hash(), "this build's block catalog");
      const MedianTarget target = parse_median_target(segment_median);
      std::vector<std::pair<std::string, fs::path>> inputs;
      if (!segment_manifest.empty()) {
        for (const auto& r : read_manifest(segment_manifest)) inputs.emplace_back(r.id, r.image);
      } else if (!segment_image.empty()) {
        inputs.emplace_back(segment_image.stem().string(), segment_image);
      } else {
        throw ValidationError("segment needs --manifest or --image");
      }
      fs::create_directories(segment_out);
      std::ostringstream summary;
      summary << "id,class,raw_blocks,smoothed_blocks\n";
      for (const auto& [id, path] : inputs) {
        const Frame frame = read_frame(path);
        for (const auto& res : segment_frame(frame, model.config, model.normalizer, model.networks, target)) {
          const std::string stem = id + "_" + std::string(to_string(res.target));
          write_mask(segment_out / (stem + "_mask.png"), res.mask);
          write_frame(segment_out / (stem + "_overlay.png"), overlay(frame, res));
          const auto count = [](const LabelGrid& g) { return std::count(g.values().begin(), g.values().end(), 1); };
          summary << id << ',' << to_string(res.target) << ',' << count(res.raw) << ',' << count(res.smoothed) << '\n';
        }
      }
      write_text_file(segment_out / "segments.csv", summary.str());
      std::cout << "segmented " << inputs.size() << " frame(s) into " << segment_out.string() << "\n";
    } else if (*eval) {
      const auto model = load_model(eval_model);
      const auto data = read_feature_csv(eval_features);
      const auto records = read_manifest(eval_manifest);
      const auto patients = eval_patients(model, records, eval_all);
      std::ostringstream csv;
      csv << report_csv_header() << '\n';
      if (model.mode == FeatureMode::Frame) {
        const auto r = evaluate_frames(model, data, records, patients);
        std::cout << format_report(r, "tumor frames");
        csv << report_csv_row("tumor", r) << '\n';
      } else {
        for (const auto& cr : evaluate_blocks(model, data, records, patients, parse_median_target(eval_median))) {
          const std::string name(to_string(cr.target));
          std::cout << format_report(cr.report, name + " blocks");
          csv << report_csv_row(name, cr.report) << '\n';
        }
      }
      if (!eval_csv.empty()) {
        ensure_parent(eval_csv);
        write_text_file(eval_csv, csv.str());
      }
    } else if (*sweep) {
      const auto data = read_feature_csv(sweep_features);
      const auto records = read_manifest(sweep_manifest);
      const FeatureMode mode = parse_feature_mode(data.mode);
      const auto& cat = catalog_for(mode, sweep_feature_flags.config());
      if (data.catalog_hash != cat.hash()) {
        throw DataError("feature matrix catalog " + data.catalog_hash + " does not match " + cat.hash());
      }
      const auto ks = parse_k_list(sweep_k);
      const auto rows = run_sweep(data, records, ks, sweep_flags.options(), parse_lesion_class(sweep_class));
      std::cout << format_sweep(rows);
      if (!sweep_csv.empty()) {
        std::ostringstream csv;
        csv << "k," << report_csv_header() << '\n';
        for (const auto& r : rows) csv << r.k << ',' << report_csv_row("k" + std::to_string(r.k), r.report) << '\n';
        ensure_parent(sweep_csv);
        write_text_file(sweep_csv, csv.str());
      }
    } else if (*catalog) {
      const auto& cat = catalog_for(parse_feature_mode(catalog_mode), catalog_flags.config());
      if (catalog_out.empty()) {
        std::cout << cat.to_json();
      } else {
        ensure_parent(catalog_out);
        write_text_file(catalog_out, cat.to_json());
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
