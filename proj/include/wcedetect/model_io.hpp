#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wcedetect/pipeline.hpp"

namespace wcedetect {

/// Everything needed to classify new data: feature settings, the catalog the model was
/// trained against, the fitted normalizer and one network per target class.
struct ModelBundle {
  static constexpr int kVersion = 1;

  FeatureMode mode = FeatureMode::Frame;
  FeatureConfig config;
  std::string catalog_hash;
  Normalizer normalizer;
  std::vector<ClassNetwork> networks;
  /// Patients held out when the bundle was trained; eval defaults to these.
  std::vector<std::string> test_patients;
  std::uint64_t seed = 0;

  /// Throws DataError when `hash` differs from the bundle's catalog hash.
  void require_catalog(std::string_view hash, std::string_view what) const;
  const ClassNetwork& network_for(LesionClass target) const;
};

std::string model_to_json(const ModelBundle& bundle);
ModelBundle model_from_json(std::string_view text);

void save_model(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_model(const std::filesystem::path& path);

}  // namespace wcedetect
