#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "camp/attacker.hpp"
#include "camp/certifier.hpp"
#include "camp/trainer.hpp"

namespace camp::cli {

struct CertifySettings {
  std::size_t episodes = 10000;
  double alpha = cert::kDefaultAlpha;
  std::vector<double> tau_grid{0.2, 0.4, 0.6, 0.8, 1.0};
  cert::BoundMode mode = cert::BoundMode::kDkw;
};

struct AttackSettings {
  attack::AttackConfig attack{};
  std::vector<double> tau_grid{0.2, 0.4, 0.6, 0.8, 1.0};
};

struct RadiiSettings {
  std::size_t episodes = 1000;
  cert::RadiusQuery query{};
};

struct RunConfig {
  std::string env_name = "cartpole1";
  train::TrainConfig train = train::TrainConfig::desk_preset();
  CertifySettings certify{};
  AttackSettings attack{};
  RadiiSettings radii{};
  int eval_episodes = 100;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> out_dir;

  double sigma() const { return train.sigma; }
  std::uint64_t seed() const { return train.seed; }
  train::Method method() const { return train.method; }
  void set_seed(std::uint64_t seed);
  void set_threads(unsigned threads);
};

// Flat text config, one `key = value` per line. Keys are dotted
// (`train.batch_size`), or undotted under a preceding `[train]` header.
// `#` starts a comment, lists are comma separated. Unknown keys and
// out-of-range values raise ConfigError naming the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Every recognised key with a one-line description, for --help output.
std::vector<std::pair<std::string, std::string>> config_keys();

}  // namespace camp::cli
