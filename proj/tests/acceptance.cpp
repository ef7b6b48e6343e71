// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance [work_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wcedetect/filters.hpp"
#include "wcedetect/glcm.hpp"
#include "wcedetect/image_io.hpp"
#include "wcedetect/lbp.hpp"
#include "wcedetect/moments.hpp"
#include "wcedetect/synth.hpp"
#include "wcedetect/workflow.hpp"

using namespace wcedetect;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::string fmt(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

Frame random_frame(Rng& rng, int size) {
  Frame f(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      f.set(x, y, {static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                   static_cast<std::uint8_t>(rng.below(256))});
    }
  return f;
}

// --- 1: feature counts ------------------------------------------------------

Outcome feature_counts() {
  const auto t0 = Clock::now();
  std::vector<std::string> bad;
  auto expect = [&](const std::string& what, std::size_t got, std::size_t want) {
    if (got != want) bad.push_back(what + "=" + std::to_string(got) + " (want " + std::to_string(want) + ")");
  };
  const auto& fc = frame_catalog();
  const auto& bc = block_catalog();
  expect("frame catalog", fc.size(), 1160);
  expect("frame Gabor", fc.count_group("Gabor"), 990);
  expect("frame Laws", fc.count_group("Laws"), 75);
  expect("frame GLCM", fc.count_group("GLCM"), 88);
  expect("frame Moment", fc.count_group("Moment"), 7);
  expect("block catalog", bc.size(), 381);
  expect("block LBP+GLCM", bc.count_group("LBP") + bc.count_group("GLCM"), 202);
  expect("block LBP", bc.count_group("LBP"), 110);
  expect("block GLCM", bc.count_group("GLCM"), 23 * 4);
  expect("block Laws", bc.count_group("Laws"), 105);
  expect("block Gabor", bc.count_group("Gabor"), 50);
  expect("block Color", bc.count_group("Color"), 24);
  expect("Laws 5-tap masks", laws_masks(5).size(), 15);
  expect("Laws 7-tap masks", laws_masks(7).size(), 21);

  Rng rng(1);
  const Frame block = random_frame(rng, 32);
  const Image gray = to_grayscale(block);
  expect("LBP1", lbp::lbp1_features(gray).size(), 37);
  expect("LBP2", lbp::lbp2_features(gray).size(), 36);
  expect("GLCM features", glcm_features(compute_glcm(gray)).values.size(), 22);
  expect("block vector", block_features(block).size(), 381);
  expect("frame vector", frame_features(random_frame(rng, kFrameCropSize)).size(), 1160);

  Outcome o;
  o.seconds = seconds_since(t0);
  o.pass = bad.empty() && o.seconds < 1.0;
  if (bad.empty()) {
    o.detail = "1160 = 990+75+88+7, 381 = 202+105+50+24, 202 = 110+23x4, LBP 37/36, Laws 15/21, GLCM 22";
  } else {
    for (const auto& b : bad) o.detail += b + "; ";
  }
  if (o.seconds >= 1.0) o.detail += " (over the 1 s budget)";
  return o;
}

// --- 2: oracle equivalence --------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  int glcm_mismatch = 0;
  for (int t = 0; t < 50; ++t) {
    const Image img = oracle::random_image(rng, 8, 8);
    for (int angle : {0, 45, 90, 135}) {
      GlcmConfig cfg;
      cfg.angle = angle;
      const GlcmMatrix m = compute_glcm(img, cfg);
      const auto ref = oracle::glcm(img, cfg.levels, angle, cfg.distance, cfg.symmetric);
      for (int i = 0; i < cfg.levels; ++i)
        for (int j = 0; j < cfg.levels; ++j) worst = std::max(worst, std::abs(m(i, j) - ref[i][j]));
      const auto f = glcm_features(m).values;
      const auto rf = oracle::glcm_features(ref);
      for (std::size_t k = 0; k < kGlcmFeatureCount; ++k) {
        const double err = std::abs(f[k] - rf[k]) / std::max(1.0, std::abs(rf[k]));
        worst = std::max(worst, err);
        if (err > 1e-9) ++glcm_mismatch;
      }
    }
  }
  int lbp_mismatch = 0;
  for (int t = 0; t < 20; ++t) {
    const Image img = oracle::random_image(rng, 32, 32, t % 2 == 0);
    if (lbp::lbp1_features(img) != oracle::lbp1(img)) ++lbp_mismatch;
    if (lbp::lbp2_features(img) != oracle::lbp2(img)) ++lbp_mismatch;
  }
  Outcome o;
  o.seconds = seconds_since(t0);
  o.pass = glcm_mismatch == 0 && lbp_mismatch == 0 && o.seconds < 30.0;
  char worst_text[32];
  std::snprintf(worst_text, sizeof(worst_text), "%.2e", worst);
  o.detail = "GLCM 50 images x 4 angles, worst relative error " + std::string(worst_text) + " (" +
             std::to_string(glcm_mismatch) + " over 1e-9); LBP 20 images, " + std::to_string(lbp_mismatch) +
             " mismatches";
  return o;
}

// --- 3: Hu invariances ------------------------------------------------------

Image embed(const Image& img, int size, int ox, int oy) {
  Image out(size, size, 0.0);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(ox + x, oy + y) = img(x, y);
  return out;
}

Image rotate90(const Image& img) {
  Image out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(img.height() - 1 - y, x) = img(x, y);
  return out;
}

Outcome hu_invariance() {
  const auto t0 = Clock::now();
  Rng rng(3);
  double e_shift = 0, e_rot = 0, e_up = 0, e_mirror = 0;
  for (int t = 0; t < 20; ++t) {
    const Image img = oracle::random_image(rng, 64, 64);
    const HuVector h = hu_moments(img);
    // Translation moves the image inside a larger zero canvas so nothing is clipped.
    const int dx = 1 + static_cast<int>(rng.below(32)), dy = static_cast<int>(rng.below(32));
    const HuVector a = hu_moments(embed(img, 96, 0, 0));
    const HuVector b = hu_moments(embed(img, 96, dx, dy));
    const HuVector r90 = hu_moments(rotate90(img));
    const HuVector r180 = hu_moments(rotate90(rotate90(img)));
    Image up(128, 128), mirrored(64, 64);
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x) up(x, y) = img(x / 2, y / 2);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) mirrored(63 - x, y) = img(x, y);
    const HuVector u = hu_moments(up);
    const HuVector m = hu_moments(mirrored);
    for (int k = 0; k < 7; ++k) {
      e_shift = std::max(e_shift, std::abs(a[k] - b[k]));
      e_rot = std::max({e_rot, std::abs(r90[k] - h[k]), std::abs(r180[k] - h[k])});
      e_up = std::max(e_up, std::abs(u[k] - h[k]));
      e_mirror = std::max(e_mirror, k == 6 ? std::abs(m[k] + h[k]) : std::abs(m[k] - h[k]));
    }
  }
  Outcome o;
  o.seconds = seconds_since(t0);
  o.pass = e_shift <= 1e-9 && e_rot <= 1e-6 && e_up <= 1e-3 && e_mirror <= 1e-6;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "20 images: translation %.2e (<=1e-9), rotation %.2e (<=1e-6), upscale %.2e (<=1e-3), "
                "mirror/phi7 flip %.2e (<=1e-6)", e_shift, e_rot, e_up, e_mirror);
  o.detail = buf;
  return o;
}

// --- 4: LBP invariance ------------------------------------------------------

Outcome lbp_invariance() {
  const auto t0 = Clock::now();
  Rng rng(4);
  int offset_failures = 0;
  for (int t = 0; t < 20; ++t) {
    const Image img = oracle::random_image(rng, 32, 32, true);
    Image lifted = img;
    const double c = static_cast<double>(rng.below(401)) - 200.0;
    for (auto& v : lifted.values()) v += c;
    if (lbp::lbp1_features(img) != lbp::lbp1_features(lifted)) ++offset_failures;
    if (lbp::lbp2_features(img) != lbp::lbp2_features(lifted)) ++offset_failures;
  }
  int orbit_failures = 0;
  for (std::uint32_t code = 0; code < 256; ++code) {
    const std::uint32_t ri = lbp::rotation_invariant(code, 8);
    if (ri != oracle::min_rotation(code, 8)) ++orbit_failures;
    for (int r = 1; r < 8; ++r) {
      const std::uint32_t rotated = ((code >> r) | (code << (8 - r))) & 0xFFu;
      if (lbp::rotation_invariant(rotated, 8) != ri) ++orbit_failures;
    }
  }
  Outcome o;
  o.seconds = seconds_since(t0);
  o.pass = offset_failures == 0 && orbit_failures == 0;
  o.detail = "constant offset on 20 images: " + std::to_string(offset_failures) +
             " changed vectors; P=8 orbits over all 256 codes: " + std::to_string(orbit_failures) + " violations";
  return o;
}

// --- 5: metrics arithmetic --------------------------------------------------

Outcome metrics_arithmetic() {
  const auto t0 = Clock::now();
  std::vector<int> pred, truth;
  auto add = [&](int p, int t, int n) {
    for (int i = 0; i < n; ++i) {
      pred.push_back(p);
      truth.push_back(t);
    }
  };
  add(1, 1, 12);  // TP
  add(0, 1, 0);   // FN
  add(0, 0, 41);  // TN
  add(1, 0, 2);   // FP
  const EvalReport r = evaluate(pred, truth);
  Outcome o;
  o.seconds = seconds_since(t0);
  o.pass = r.tp == 12 && r.fn == 0 && r.tn == 41 && r.fp == 2 && r.sensitivity && *r.sensitivity == 1.0 &&
           r.specificity && *r.specificity == 41.0 / 43.0;
  o.detail = "counts (TP,FN,TN,FP) = (12,0,41,2): sensitivity " + fmt(r.sensitivity.value_or(-1)) +
             ", specificity " + fmt(r.specificity.value_or(-1)) + " (41/43 exactly)";
  return o;
}

// --- corpus shared by criteria 6, 7 and 8 -------------------------------------

struct Corpus {
  std::vector<ManifestRecord> records;
  LabeledDataset frames;
  LabeledDataset blocks;
  double prepare_seconds = 0.0;
};

Corpus prepare_corpus(const fs::path& dir, const SynthConfig& cfg) {
  const auto t0 = Clock::now();
  Corpus c;
  c.records = write_synthetic_corpus(cfg, dir);
  c.frames = extract_dataset(c.records, FeatureMode::Frame);
  c.blocks = extract_dataset(c.records, FeatureMode::Block);
  c.prepare_seconds = seconds_since(t0);
  return c;
}

// --- 6: learning sanity -----------------------------------------------------

bool non_increasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] > h[i - 1]) return false;
  return true;
}

Outcome learning_sanity(const Corpus& corpus) {
  const auto t0 = Clock::now();
  FeatureMatrix x(4, 2);
  x(1, 1) = x(2, 0) = x(3, 0) = x(3, 1) = 1.0;
  const std::vector<int> y{0, 1, 1, 0};
  int solved_seed = 0, solved_epochs = 0;
  for (int seed = 1; seed <= 5 && solved_seed == 0; ++seed) {
    MlpTrainConfig cfg;
    cfg.hidden = {4};
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.epochs = 20000;
    cfg.learning_rate = 2.0;
    const MlpModel m = mlp_train(x, y, cfg);
    const auto p = mlp_predict(m, x);
    bool all = true;
    for (int i = 0; i < 4; ++i) all = all && ((p[i] >= kDecisionThreshold ? 1 : 0) == y[i]);
    if (all) {
      solved_seed = seed;
      solved_epochs = m.epochs_run;
    }
  }

  // Small-step descent on the synthetic corpus: tumor-vs-rest frames and balanced tumor blocks,
  // each on its top 30 Fisher features after min-max scaling.
  std::vector<std::string> monotone_failures;
  auto descend = [&](const LabeledDataset& data, std::vector<std::size_t> rows, std::vector<int> hidden,
                     int epochs, const std::string& name) {
    std::vector<int> labels;
    for (auto r : rows) labels.push_back(data.labels[r] == LesionClass::Tumor ? 1 : 0);
    const FeatureMatrix raw = data.features.select_rows(rows);
    const FeatureMatrix xn = Normalizer::fit(raw).apply(raw);
    const FeatureMatrix top = xn.select_cols(select_top_k(fisher_scores(xn, labels), 30));
    MlpTrainConfig cfg;
    cfg.hidden = std::move(hidden);
    cfg.epochs = epochs;
    cfg.learning_rate = 0.01;
    cfg.target_mse = 0.0;
    std::vector<double> history;
    mlp_train(top, labels, cfg, &history);
    if (!non_increasing(history)) monotone_failures.push_back(name);
  };
  std::vector<std::size_t> frame_rows;
  for (std::size_t i = 0; i < corpus.frames.labels.size(); ++i)
    if (corpus.frames.labels[i] != LesionClass::Bleeding) frame_rows.push_back(i);
  descend(corpus.frames, frame_rows, {20}, 1000, "frames");
  std::vector<int> block_labels;
  for (auto l : corpus.blocks.labels) block_labels.push_back(l == LesionClass::Tumor ? 1 : 0);
  descend(corpus.blocks, balance_rows(block_labels, 2.0, 6), {30, 20, 10}, 300, "blocks");

  Outcome o;
  o.seconds = seconds_since(t0);
  o.pass = solved_seed != 0 && monotone_failures.empty();
  o.detail = solved_seed ? "XOR solved with seed " + std::to_string(solved_seed) + " after " +
                               std::to_string(solved_epochs) + " epochs"
                         : std::string("XOR not solved by seeds 1-5");
  o.detail += monotone_failures.empty() ? "; lr=0.01 loss non-increasing on frame and block corpus sets"
                                        : "; loss increased on: " + monotone_failures.front();
  return o;
}

// --- 7: end-to-end synthetic benchmark --------------------------------------

Outcome end_to_end(const Corpus& corpus) {
  const auto t0 = Clock::now();
  TrainOptions options;
  const ModelBundle frame_model = train_model(corpus.frames, corpus.records, {}, options);
  const ModelBundle block_model = train_model(corpus.blocks, corpus.records, {}, options);
  const std::set<std::string> fp(frame_model.test_patients.begin(), frame_model.test_patients.end());
  const std::set<std::string> bp(block_model.test_patients.begin(), block_model.test_patients.end());
  const EvalReport frame = evaluate_frames(frame_model, corpus.frames, corpus.records, fp);
  const auto blocks = evaluate_blocks(block_model, corpus.blocks, corpus.records, bp);

  Outcome o;
  o.seconds = corpus.prepare_seconds + seconds_since(t0);
  o.pass = frame.accuracy.value_or(0) >= 0.90 && o.seconds <= 600.0;
  std::ostringstream os;
  for (const auto& cr : blocks) {
    const double sens = cr.report.sensitivity.value_or(0), spec = cr.report.specificity.value_or(0);
    o.pass = o.pass && sens >= 0.90 && spec >= 0.90;
    os << to_string(cr.target) << " blocks sens " << fmt(sens) << " spec " << fmt(spec) << "; ";
  }
  os << "frame accuracy " << fmt(frame.accuracy.value_or(0)) << " (" << frame.tp + frame.fp + frame.tn + frame.fn
     << " test frames); total " << fmt(o.seconds, 1) << " s of 600";
  o.detail = os.str();
  return o;
}

// --- 8: sweep shape ---------------------------------------------------------

Outcome sweep_shape(const Corpus& corpus, const fs::path& report_path) {
  const auto t0 = Clock::now();
  const std::vector<std::size_t> ks{10, 20, 25, 30, 35, 40};
  const auto rows = run_sweep(corpus.frames, corpus.records, ks, TrainOptions{});
  const std::string table = format_sweep(rows);
  write_text_file(report_path, table);
  double at10 = -1, at30 = -1;
  for (const auto& r : rows) {
    if (r.k == 10) at10 = balanced_accuracy(r.report);
    if (r.k == 30) at30 = balanced_accuracy(r.report);
  }
  const bool shaped = rows.size() == ks.size() && table.rfind("Number of features | Sensitivity | Specificity", 0) == 0;
  Outcome o;
  o.seconds = seconds_since(t0);
  o.pass = shaped && at30 >= at10 && at10 >= 0;
  o.detail = std::to_string(rows.size()) + "-row table written to " + report_path.filename().string() +
             "; balanced accuracy k=30 " + fmt(at30) + " vs k=10 " + fmt(at10);
  return o;
}

// --- 9: determinism ---------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_text_file(e.path());
  }
  return files;
}

void produce_artifacts(const fs::path& dir) {
  fs::remove_all(dir);
  SynthConfig cfg;
  cfg.seed = 9;
  cfg.frames_per_class = 4;
  cfg.frames_per_patient = 2;
  const auto records = write_synthetic_corpus(cfg, dir / "corpus");
  const auto frames = extract_dataset(records, FeatureMode::Frame);
  const auto blocks = extract_dataset(records, FeatureMode::Block);
  write_feature_csv(dir / "frames.csv", frames);
  write_feature_csv(dir / "blocks.csv", blocks);
  TrainOptions options;
  options.seed = 9;
  options.epochs = 300;
  options.test_fraction = 0.5;
  const ModelBundle fm = train_model(frames, records, {}, options);
  const ModelBundle bm = train_model(blocks, records, {}, options);
  save_model(dir / "frame_model.json", fm);
  save_model(dir / "block_model.json", bm);
  fs::create_directories(dir / "masks");
  for (std::size_t i = 0; i < records.size(); i += 3) {
    const Frame frame = read_frame(records[i].image);
    for (const auto& seg : segment_frame(frame, bm.config, bm.normalizer, bm.networks)) {
      write_mask(dir / "masks" / (records[i].id + "_" + std::string(to_string(seg.target)) + ".png"), seg.mask);
    }
  }
}

Outcome determinism(const fs::path& work) {
  const auto t0 = Clock::now();
  produce_artifacts(work / "run_a");
  produce_artifacts(work / "run_b");
  const auto a = snapshot(work / "run_a");
  const auto b = snapshot(work / "run_b");
  int differing = 0;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) ++differing;
  }
  differing += static_cast<int>(b.size() > a.size() ? b.size() - a.size() : 0);
  Outcome o;
  o.seconds = seconds_since(t0);
  o.pass = differing == 0 && !a.empty();
  o.detail = std::to_string(a.size()) + " files (frames, masks, feature matrices, models, segmentation masks) from two runs; " +
             std::to_string(differing) + " differ";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = fs::absolute(argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "wcedetect_acceptance");
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::string> names{"",
                                       "feature-count fidelity",
                                       "oracle equivalence",
                                       "moment invariances",
                                       "LBP invariance",
                                       "metrics arithmetic",
                                       "learning sanity",
                                       "end-to-end synthetic benchmark",
                                       "sweep shape",
                                       "determinism"};
  std::vector<Outcome> results(10);
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what(), 0.0};
    }
  };

  results[1] = guarded(feature_counts);
  results[2] = guarded(oracle_equivalence);
  results[3] = guarded(hu_invariance);
  results[4] = guarded(lbp_invariance);
  results[5] = guarded(metrics_arithmetic);

  SynthConfig cfg;
  cfg.frames_per_class = 40;
  Corpus corpus;
  std::string corpus_error;
  try {
    corpus = prepare_corpus(work / "corpus", cfg);
  } catch (const std::exception& e) {
    corpus_error = e.what();
  }
  if (corpus_error.empty()) {
    results[6] = guarded([&] { return learning_sanity(corpus); });
    results[7] = guarded([&] { return end_to_end(corpus); });
    results[8] = guarded([&] { return sweep_shape(corpus, work / "sweep_report.txt"); });
  } else {
    for (int i : {6, 7, 8}) results[i] = Outcome{false, "corpus preparation failed: " + corpus_error, 0.0};
  }
  results[9] = guarded([&] { return determinism(work / "determinism"); });

  int failed = 0;
  for (int i = 1; i <= 9; ++i) {
    const Outcome& r = results[i];
    if (!r.pass) ++failed;
    std::cout << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << i << " " << names[i] << ": " << r.detail << " ["
              << fmt(r.seconds, 2) << " s]\n";
  }
  std::cout << (failed == 0 ? "all 9 criteria passed" : std::to_string(failed) + " of 9 criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
