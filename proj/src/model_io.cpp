#include "wcedetect/model_io.hpp"

#include <json.hpp>

namespace wcedetect {
namespace {

using json = nlohmann::ordered_json;

constexpr std::string_view kFormat = "wcedetect-model";

json network_to_json(const ClassNetwork& net) {
  json layers = json::array();
  for (const auto& l : net.model.layers) {
    layers.push_back({{"inputs", l.inputs}, {"outputs", l.outputs}, {"weights", l.weights}, {"biases", l.biases}});
  }
  return {{"target", to_string(net.target)},
          {"selected", net.selected},
          {"layer_sizes", net.model.layer_sizes},
          {"activation", net.model.activation},
          {"seed", net.model.seed},
          {"final_mse", net.model.final_mse},
          {"epochs_run", net.model.epochs_run},
          {"layers", layers}};
}

ClassNetwork network_from_json(const nlohmann::json& j) {
  ClassNetwork net;
  net.target = parse_lesion_class(j.at("target").get<std::string>());
  net.selected = j.at("selected").get<std::vector<std::size_t>>();
  net.model.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  net.model.activation = j.at("activation").get<std::string>();
  net.model.seed = j.at("seed").get<std::uint64_t>();
  net.model.final_mse = j.at("final_mse").get<double>();
  net.model.epochs_run = j.at("epochs_run").get<int>();
  for (const auto& l : j.at("layers")) {
    net.model.layers.push_back({l.at("inputs").get<int>(), l.at("outputs").get<int>(),
                                l.at("weights").get<std::vector<double>>(), l.at("biases").get<std::vector<double>>()});
  }
  net.model.validate();
  if (net.selected.size() != static_cast<std::size_t>(net.model.input_size())) {
    throw DataError("model: selected feature count does not match the input layer");
  }
  return net;
}

}  // namespace

void ModelBundle::require_catalog(std::string_view hash, std::string_view what) const {
  if (hash != catalog_hash) {
    throw DataError(std::string(what) + " was produced with feature catalog " + std::string(hash) +
                    " but the model expects " + catalog_hash);
  }
}

const ClassNetwork& ModelBundle::network_for(LesionClass target) const {
  for (const auto& n : networks) {
    if (n.target == target) return n;
  }
  throw ValidationError("model has no network for class " + std::string(to_string(target)));
}

std::string model_to_json(const ModelBundle& b) {
  json j;
  j["format"] = kFormat;
  j["version"] = ModelBundle::kVersion;
  j["mode"] = to_string(b.mode);
  j["config"] = {{"glcm_levels", b.config.glcm_levels},
                 {"gabor_coords", to_string(b.config.gabor_coords)},
                 {"hu_variant", to_string(b.config.hu_variant)}};
  j["catalog"] = b.catalog_hash;
  j["seed"] = b.seed;
  j["test_patients"] = b.test_patients;
  j["normalizer"] = {{"min", b.normalizer.min}, {"max", b.normalizer.max}};
  json nets = json::array();
  for (const auto& n : b.networks) nets.push_back(network_to_json(n));
  j["networks"] = nets;
  return j.dump(1) + "\n";
}

ModelBundle model_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != kFormat) throw DataError("not a model file");
    if (j.at("version") != ModelBundle::kVersion) throw DataError("unsupported model version");
    ModelBundle b;
    b.mode = parse_feature_mode(j.at("mode").get<std::string>());
    b.config.glcm_levels = j.at("config").at("glcm_levels").get<int>();
    b.config.gabor_coords = parse_gabor_coordinates(j.at("config").at("gabor_coords").get<std::string>());
    b.config.hu_variant = parse_hu_variant(j.at("config").at("hu_variant").get<std::string>());
    b.catalog_hash = j.at("catalog").get<std::string>();
    b.seed = j.at("seed").get<std::uint64_t>();
    b.test_patients = j.at("test_patients").get<std::vector<std::string>>();
    b.normalizer.min = j.at("normalizer").at("min").get<std::vector<double>>();
    b.normalizer.max = j.at("normalizer").at("max").get<std::vector<double>>();
    if (b.normalizer.min.size() != b.normalizer.max.size()) throw DataError("model: normalizer size mismatch");
    for (const auto& n : j.at("networks")) b.networks.push_back(network_from_json(n));
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: malformed JSON: ") + e.what());
  } catch (const ValidationError& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelBundle& bundle) {
  write_text_file(path, model_to_json(bundle));
}

ModelBundle load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace wcedetect
