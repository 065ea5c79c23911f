#pragma once

#include <cstdint>
#include <functional>

#include "camp/cartpole.hpp"
#include "camp/network.hpp"

namespace camp::env {

// Per-episode streams shared by evaluation, certification and attacks, so
// the same (seed, episode index) replays the same start state and noise.
struct EpisodeStreams {
  std::uint64_t reset_seed;
  Engine noise;

  static EpisodeStreams derive(std::uint64_t master_seed, std::uint64_t episode);
};

struct StepView {
  int step = 0;
  const Eigen::VectorXd* clean_obs = nullptr;
  const Eigen::VectorXd* noisy_obs = nullptr;
  const Eigen::VectorXd* q_values = nullptr;
  std::size_t action = 0;
};

// Greedy rollout on clean observation plus fresh N(0, sigma^2) noise each
// step. Returns the undiscounted episode return.
double greedy_episode(const nn::QNetwork& net, const EnvConfig& env_cfg, double sigma,
                      std::uint64_t master_seed, std::uint64_t episode,
                      const std::function<void(const StepView&)>& on_step = {});

}  // namespace camp::env
