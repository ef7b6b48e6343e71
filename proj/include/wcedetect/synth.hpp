#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wcedetect/dataset.hpp"
#include "wcedetect/imgcore.hpp"

namespace wcedetect {

/// Parameters of the synthetic corpus. Normal frames are textured mucosa-like backgrounds;
/// each lesion frame adds one cluster of overlapping ellipses rendered in the class style.
struct SynthConfig {
  std::uint64_t seed = 1;
  int frames_per_class = 40;
  int frames_per_patient = 5;
  int frame_size = 512;
  int block_size = 32;

  int blobs_min = 5;
  int blobs_max = 7;
  double blob_radius_min = 100.0;
  double blob_radius_max = 127.0;
  /// Maximum distance of a blob centre from the cluster centre.
  double cluster_spread = 120.0;

  /// Normal mucosa texture.
  double texture_amplitude = 10.0;
  double fine_noise = 3.0;
  double fold_amplitude_max = 12.0;

  /// Tumor: brightness gain of the dome and the share of background texture kept.
  double tumor_dome_amplitude = 45.0;
  double tumor_texture_keep = 0.2;
  /// Disease: amplitude and period (pixels) of the high-frequency pattern.
  double disease_amplitude = 40.0;
  double disease_period_min = 3.0;
  double disease_period_max = 5.0;

  void validate() const;
};

struct SynthFrame {
  Frame frame;
  LabelGrid block_truth;  // frame_size / block_size squared
  LabelGrid pixel_truth;
};

/// Deterministic rendering of one frame; `index` selects the random stream.
SynthFrame render_synthetic_frame(const SynthConfig& config, LesionClass label, int patient, int index);

/// Writes frames/<id>.png, masks/<id>.png and manifest.csv under `out_dir`; returns the records.
std::vector<ManifestRecord> write_synthetic_corpus(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace wcedetect
