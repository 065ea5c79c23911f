#include "camp/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "camp/errors.hpp"

namespace camp::nn {

using nlohmann::json;

std::string checkpoint_to_string(const QNetwork& net, const CheckpointMeta& meta) {
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["input_dim"] = net.input_dim();
  doc["hidden_dims"] = net.hidden_dims();
  doc["action_dim"] = net.action_dim();
  json weights = json::array();
  json biases = json::array();
  for (const auto& layer : net.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        w.push_back(layer.weight(r, c));
      }
    }
    weights.push_back(std::move(w));
    biases.push_back(std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size()));
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  doc["meta"] = {{"method", meta.method},
                 {"sigma", meta.sigma},
                 {"lambda", meta.lambda},
                 {"seed", meta.seed},
                 {"train_steps", meta.train_steps}};
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw ConfigError("unsupported checkpoint format_version " + std::to_string(version) +
                        " (expected " + std::to_string(kCheckpointFormatVersion) + ")");
    }
    std::vector<std::size_t> dims{doc.at("input_dim").get<std::size_t>()};
    for (auto h : doc.at("hidden_dims").get<std::vector<std::size_t>>()) dims.push_back(h);
    dims.push_back(doc.at("action_dim").get<std::size_t>());

    Checkpoint ck{QNetwork(dims), {}};
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    auto& layers = ck.net.layers();
    if (weights.size() != layers.size() || biases.size() != layers.size()) {
      throw ConfigError("checkpoint layer count does not match its dimensions");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto w = weights[i].get<std::vector<double>>();
      const auto b = biases[i].get<std::vector<double>>();
      auto& layer = layers[i];
      if (w.size() != static_cast<std::size_t>(layer.weight.size()) ||
          b.size() != static_cast<std::size_t>(layer.bias.size())) {
        throw ConfigError("checkpoint layer " + std::to_string(i) + " has the wrong parameter count");
      }
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
          layer.weight(r, c) = w[k++];
        }
      }
      for (std::size_t j = 0; j < b.size(); ++j) {
        layer.bias(static_cast<Eigen::Index>(j)) = b[j];
      }
    }
    if (!ck.net.all_finite()) {
      throw ConfigError("checkpoint contains non-finite parameters");
    }
    const auto& meta = doc.at("meta");
    ck.meta.method = meta.at("method").get<std::string>();
    ck.meta.sigma = meta.at("sigma").get<double>();
    ck.meta.lambda = meta.at("lambda").get<double>();
    ck.meta.seed = meta.at("seed").get<std::uint64_t>();
    ck.meta.train_steps = meta.at("train_steps").get<std::int64_t>();
    return ck;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const QNetwork& net, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write checkpoint " + path.string());
  }
  out << checkpoint_to_string(net, meta);
  if (!out) {
    throw IoError("failed writing checkpoint " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace camp::nn
