#include "wcedetect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "wcedetect/image_io.hpp"
#include "wcedetect/random.hpp"

namespace wcedetect {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFeather = 3.0;  // half-width of the soft lesion edge, pixels

// Smooth Gaussian field: white noise on a coarse lattice, bilinearly upsampled.
Image smooth_noise(Rng& rng, int size, int cell) {
  const int n = size / cell + 2;
  std::vector<double> lattice(static_cast<std::size_t>(n) * n);
  for (double& v : lattice) v = rng.normal();
  Image out(size, size);
  for (int y = 0; y < size; ++y) {
    const double fy = static_cast<double>(y) / cell;
    const int y0 = static_cast<int>(fy);
    const double ty = fy - y0;
    for (int x = 0; x < size; ++x) {
      const double fx = static_cast<double>(x) / cell;
      const int x0 = static_cast<int>(fx);
      const double tx = fx - x0;
      const auto at = [&](int i, int j) { return lattice[static_cast<std::size_t>(j) * n + i]; };
      const double top = at(x0, y0) * (1 - tx) + at(x0 + 1, y0) * tx;
      const double bottom = at(x0, y0 + 1) * (1 - tx) + at(x0 + 1, y0 + 1) * tx;
      out(x, y) = top * (1 - ty) + bottom * ty;
    }
  }
  return out;
}

struct Blob {
  double cx, cy, a, b, angle;
};

struct Appearance {
  double r, g, b;
};

Appearance patient_appearance(const SynthConfig& cfg, LesionClass label, int patient) {
  Rng rng(derive_seed(cfg.seed, 1'000'000 + static_cast<std::uint64_t>(label) * 1000 + patient));
  return {rng.uniform(170, 200), rng.uniform(90, 115), rng.uniform(70, 90)};
}

std::vector<Blob> lesion_cluster(const SynthConfig& cfg, Rng& rng) {
  const double lo = cfg.frame_size / 4.0;
  const double hi = cfg.frame_size * 3.0 / 4.0;
  const double cx = rng.uniform(lo, hi);
  const double cy = rng.uniform(lo, hi);
  const int count = cfg.blobs_min + static_cast<int>(rng.below(cfg.blobs_max - cfg.blobs_min + 1));
  std::vector<Blob> blobs;
  for (int i = 0; i < count; ++i) {
    const double dist = cfg.cluster_spread * std::sqrt(rng.uniform());
    const double dir = rng.uniform(0, kTwoPi);
    const double r = rng.uniform(cfg.blob_radius_min, cfg.blob_radius_max);
    blobs.push_back({cx + dist * std::cos(dir), cy + dist * std::sin(dir), r, r * rng.uniform(0.75, 1.0),
                     rng.uniform(0, std::numbers::pi)});
  }
  return blobs;
}

// Soft membership in the union of blobs, plus a dome height in [0,1] peaking at blob centres.
std::pair<double, double> lesion_weight(const std::vector<Blob>& blobs, double x, double y) {
  double best = -1e9, best_radius = 1.0, dome = 0.0;
  for (const Blob& b : blobs) {
    const double c = std::cos(b.angle), s = std::sin(b.angle);
    const double u = ((x - b.cx) * c + (y - b.cy) * s) / b.a;
    const double v = (-(x - b.cx) * s + (y - b.cy) * c) / b.b;
    const double f = 1.0 - (u * u + v * v);
    if (f > best) {
      best = f;
      best_radius = b.b;
    }
    dome = std::max(dome, f);
  }
  // Near the edge f ~ 2 * (distance inside) / radius.
  const double inside = best * best_radius / 2.0;
  return {std::clamp(0.5 + inside / (2.0 * kFeather), 0.0, 1.0), std::max(dome, 0.0)};
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

void SynthConfig::validate() const {
  if (frames_per_class < 1 || frames_per_patient < 1) throw ValidationError("synth: counts must be >= 1");
  if (frame_size < block_size || block_size < 1 || frame_size % block_size != 0) {
    throw ValidationError("synth: frame size must be a positive multiple of the block size");
  }
  if (blobs_min < 1 || blobs_max < blobs_min) throw ValidationError("synth: invalid blob count range");
  if (!(blob_radius_min > 0) || blob_radius_max < blob_radius_min) throw ValidationError("synth: invalid blob radii");
  if (blob_radius_max >= frame_size / 4.0) throw ValidationError("synth: blob radius must be below frame size / 4");
  if (disease_period_min < 2.0 || disease_period_max < disease_period_min) {
    throw ValidationError("synth: invalid disease pattern period");
  }
}

SynthFrame render_synthetic_frame(const SynthConfig& cfg, LesionClass label, int patient, int index) {
  cfg.validate();
  const int n = cfg.frame_size;
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(label) * 100'000 + index));
  const Appearance base = patient_appearance(cfg, label, patient);

  // Mucosa: vignetted base colour, a low-frequency fold pattern and correlated texture.
  const double vignette = rng.uniform(0.15, 0.3);
  const double icx = n / 2.0 + rng.uniform(-30, 30), icy = n / 2.0 + rng.uniform(-30, 30);
  const double fold_dir = rng.uniform(0, std::numbers::pi);
  const double fold_period = rng.uniform(60, 120);
  const double fold_phase = rng.uniform(0, kTwoPi);
  const double fold_amp = rng.uniform(cfg.fold_amplitude_max / 2, cfg.fold_amplitude_max);
  const Image coarse = smooth_noise(rng, n, 16);
  const Image medium = smooth_noise(rng, n, 4);

  std::vector<Blob> blobs;
  if (label != LesionClass::Normal) blobs = lesion_cluster(cfg, rng);
  const double dome_amp = cfg.tumor_dome_amplitude * rng.uniform(0.8, 1.2);
  const Appearance blood{rng.uniform(150, 190), rng.uniform(25, 45), 0.0};
  const double blood_blue_ratio = rng.uniform(0.6, 0.9);
  const double pattern_dir = rng.uniform(0, std::numbers::pi);
  const double p1 = rng.uniform(cfg.disease_period_min, cfg.disease_period_max);
  const double p2 = rng.uniform(cfg.disease_period_min, cfg.disease_period_max);
  const double pattern_amp = cfg.disease_amplitude * rng.uniform(0.8, 1.2);

  SynthFrame out{Frame(n, n), LabelGrid(n / cfg.block_size, n / cfg.block_size), LabelGrid(n, n)};
  const double rmax2 = 2.0 * (n / 2.0) * (n / 2.0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double d2 = (x - icx) * (x - icx) + (y - icy) * (y - icy);
      const double illum = 1.0 - vignette * d2 / rmax2;
      const double fold =
          fold_amp * std::sin(kTwoPi * (x * std::cos(fold_dir) + y * std::sin(fold_dir)) / fold_period + fold_phase);
      const double texture = cfg.texture_amplitude * (0.6 * coarse(x, y) + 0.8 * medium(x, y)) +
                             cfg.fine_noise * rng.normal();
      const double t = fold + texture;
      double r = base.r * illum + t;
      double g = base.g * illum + 0.8 * t;
      double b = base.b * illum + 0.7 * t;

      if (!blobs.empty()) {
        const auto [w, dome] = lesion_weight(blobs, x, y);
        if (w > 0.0) {
          double lr = r, lg = g, lb = b;
          switch (label) {
            case LesionClass::Tumor: {
              const double tt = cfg.tumor_texture_keep * texture;
              const double lift = dome_amp * std::sqrt(dome);
              lr = base.r * 1.05 * illum + lift + tt;
              lg = base.g * 1.15 * illum + lift + 0.8 * tt;
              lb = base.b * 1.10 * illum + 0.8 * lift + 0.7 * tt;
              break;
            }
            case LesionClass::Bleeding: {
              const double tt = 0.3 * texture;
              lr = blood.r * illum + tt;
              lg = blood.g * illum + 0.2 * tt;
              lb = blood.g * blood_blue_ratio * illum + 0.2 * tt * blood_blue_ratio;
              break;
            }
            case LesionClass::Disease: {
              const double u = x * std::cos(pattern_dir) + y * std::sin(pattern_dir);
              const double v = -x * std::sin(pattern_dir) + y * std::cos(pattern_dir);
              const double pat = pattern_amp * std::sin(kTwoPi * u / p1) * std::sin(kTwoPi * v / p2);
              lr = r + pat + 10;
              lg = g + pat + 15;
              lb = b + pat + 15;
              break;
            }
            case LesionClass::Normal:
              break;
          }
          r = (1 - w) * r + w * lr;
          g = (1 - w) * g + w * lg;
          b = (1 - w) * b + w * lb;
          if (w >= 0.5) out.pixel_truth(x, y) = 1;
        }
      }
      out.frame.set(x, y, {to_byte(r), to_byte(g), to_byte(b)});
    }
  }

  const int bs = cfg.block_size;
  for (const auto& t : tile(out.pixel_truth, bs)) {
    const auto on = std::count(t.image.values().begin(), t.image.values().end(), std::uint8_t{1});
    out.block_truth(t.col, t.row) = 2 * on >= bs * bs ? 1 : 0;
  }
  return out;
}

std::vector<ManifestRecord> write_synthetic_corpus(const SynthConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();
  const auto out_dir = std::filesystem::absolute(out);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "frames", ec);
  if (!ec) std::filesystem::create_directories(out_dir / "masks", ec);
  if (ec) throw DataError("cannot create corpus directory " + out_dir.string() + ": " + ec.message());

  std::vector<ManifestRecord> records;
  const LesionClass classes[] = {LesionClass::Normal, LesionClass::Tumor, LesionClass::Bleeding,
                                 LesionClass::Disease};
  for (LesionClass label : classes) {
    for (int i = 0; i < cfg.frames_per_class; ++i) {
      const int patient = i / cfg.frames_per_patient;
      char id[64], pid[64];
      std::snprintf(id, sizeof(id), "%s_%03d", std::string(to_string(label)).c_str(), i);
      std::snprintf(pid, sizeof(pid), "%s_p%02d", std::string(to_string(label)).c_str(), patient);
      const SynthFrame f = render_synthetic_frame(cfg, label, patient, i);
      ManifestRecord rec{id, out_dir / "frames" / (std::string(id) + ".png"), label, pid,
                         out_dir / "masks" / (std::string(id) + ".png")};
      write_frame(rec.image, f.frame);
      write_mask(rec.mask, f.block_truth);
      records.push_back(std::move(rec));
    }
  }
  write_manifest(out_dir / "manifest.csv", records);
  return records;
}

}  // namespace wcedetect
