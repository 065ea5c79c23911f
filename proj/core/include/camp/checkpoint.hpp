#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "camp/network.hpp"

namespace camp::nn {

inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointMeta {
  std::string method = "unknown";
  double sigma = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::int64_t train_steps = 0;
};

struct Checkpoint {
  QNetwork net;
  CheckpointMeta meta;
};

// JSON document: format_version, input_dim, hidden_dims, action_dim,
// weights (one row-major array per layer), biases, meta. Doubles are
// written with round-trip precision.
std::string checkpoint_to_string(const QNetwork& net, const CheckpointMeta& meta);
Checkpoint checkpoint_from_string(const std::string& text);

// Throws IoError when the file cannot be opened or written.
void save_checkpoint(const std::filesystem::path& path, const QNetwork& net, const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace camp::nn
