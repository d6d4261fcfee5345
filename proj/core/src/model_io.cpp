#include "container.hpp"
#include "wortsense/error.hpp"
#include "wortsense/lstmnet.hpp"

namespace wortsense {

namespace {

using nlohmann::json;

constexpr detail::Magic kModelMagic{'W', 'S', 'L', 'S', 'T', 'M', '0', '1'};

}  // namespace

json model_config_to_json(const ModelConfig& c) {
  return {{"windowsize", c.windowsize},
          {"totalfeatures", c.features},
          {"lstm_dim", c.lstm_dim},
          {"dense_dims", c.dense_dims},
          {"output_dim", c.output_dim}};
}

ModelConfig model_config_from_json(const json& doc) {
  ModelConfig c;
  try {
    c.windowsize = doc.at("windowsize").get<std::size_t>();
    c.features = doc.at("totalfeatures").get<std::size_t>();
    c.lstm_dim = doc.at("lstm_dim").get<std::size_t>();
    c.dense_dims = doc.at("dense_dims").get<std::vector<std::size_t>>();
    c.output_dim = doc.at("output_dim").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model config: ") + e.what());
  }
  c.validate();
  return c;
}

void save_params(const std::filesystem::path& path, const ModelFile& model) {
  const auto& params = model.params;
  const auto& cfg = params.config();
  if (model.feature_names.size() != cfg.features)
    throw ValidationError("save_params: feature names do not match the model's feature count");
  if (model.norm_stats.mean.size() != cfg.features || model.norm_stats.sd.size() != cfg.features)
    throw ValidationError("save_params: norm_stats do not match the model's feature count");
  if (!params.all_finite()) throw NumericalError("save_params: parameters are not finite");

  json blocks = json::array();
  for (const auto& b : params.blocks())
    blocks.push_back({{"name", b.name}, {"shape", {b.rows, b.cols}}});
  const json header{
      {"version", kModelFormatVersion},
      {"config", model_config_to_json(cfg)},
      {"feature_names", model.feature_names},
      {"norm_stats", {{"mean", model.norm_stats.mean}, {"sd", model.norm_stats.sd}}},
      {"metadata", model.metadata},
      {"blocks", blocks},
      {"parameter_count", params.size()},
  };
  detail::ContainerWriter writer(path, kModelMagic, header);
  writer.write(params.values());
  writer.finish();
}

ModelFile load_params(const std::filesystem::path& path,
                      std::optional<std::size_t> expected_features) {
  detail::ContainerReader reader(path, kModelMagic, "model weights");
  const auto& h = reader.header();
  ModelFile model;
  ModelConfig cfg;
  try {
    const int version = h.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw IoError(path.string() + ": unsupported weights version " + std::to_string(version) +
                    " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    cfg = model_config_from_json(h.at("config"));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": malformed weights header: " + e.what());
  } catch (const ValidationError& e) {
    throw IoError(path.string() + ": " + e.what());
  }

  if (expected_features && *expected_features != cfg.features) {
    throw ValidationError(path.string() + ": feature mismatch, model was trained with " +
                          std::to_string(cfg.features) + " features but " +
                          std::to_string(*expected_features) + " were requested");
  }

  try {
    model.feature_names = h.at("feature_names").get<std::vector<std::string>>();
    model.norm_stats.mean = h.at("norm_stats").at("mean").get<std::vector<double>>();
    model.norm_stats.sd = h.at("norm_stats").at("sd").get<std::vector<double>>();
    model.metadata = h.value("metadata", json::object());
    if (model.feature_names.size() != cfg.features || model.norm_stats.mean.size() != cfg.features ||
        model.norm_stats.sd.size() != cfg.features)
      throw IoError(path.string() + ": feature metadata does not match totalfeatures");

    model.params = ModelParams(cfg);
    const auto& blocks = h.at("blocks");
    const auto& expected = model.params.blocks();
    if (blocks.size() != expected.size())
      throw IoError(path.string() + ": block table has " + std::to_string(blocks.size()) +
                    " entries, expected " + std::to_string(expected.size()));
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const auto name = blocks[i].at("name").get<std::string>();
      const auto shape = blocks[i].at("shape").get<std::vector<std::size_t>>();
      if (name != expected[i].name || shape.size() != 2 || shape[0] != expected[i].rows ||
          shape[1] != expected[i].cols) {
        throw IoError(path.string() + ": block '" + name + "' shape does not match config (expected " +
                      expected[i].name + " " + std::to_string(expected[i].rows) + "x" +
                      std::to_string(expected[i].cols) + ")");
      }
    }
    if (h.at("parameter_count").get<std::size_t>() != model.params.size())
      throw IoError(path.string() + ": parameter_count does not match config");
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": malformed weights header: " + e.what());
  }

  reader.read(model.params.values());
  reader.expect_end();
  if (!model.params.all_finite()) throw IoError(path.string() + ": non-finite parameters");
  return model;
}

}  // namespace wortsense
