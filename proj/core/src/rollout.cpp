#include "camp/rollout.hpp"

namespace camp::env {

EpisodeStreams EpisodeStreams::derive(std::uint64_t master_seed, std::uint64_t episode) {
  return {stream_seed(master_seed, "episode_reset", episode), make_stream(master_seed, "episode_noise", episode)};
}

double greedy_episode(const nn::QNetwork& net, const EnvConfig& env_cfg, double sigma,
                      std::uint64_t master_seed, std::uint64_t episode,
                      const std::function<void(const StepView&)>& on_step) {
  EpisodeStreams streams = EpisodeStreams::derive(master_seed, episode);
  const NoiseSpec noise(sigma);
  CartpoleEnv env(env_cfg);
  env.reset(streams.reset_seed);
  double total = 0.0;
  int t = 0;
  while (!env.done()) {
    const Eigen::VectorXd clean = env.clean_observation();
    const Eigen::VectorXd noisy = clean + sample_noise(clean.size(), noise, streams.noise);
    const Eigen::VectorXd q = net.forward(noisy);
    const std::size_t a = nn::argmax(q);
    if (on_step) {
      on_step(StepView{t, &clean, &noisy, &q, a});
    }
    total += env.step(static_cast<Action>(a)).reward;
    ++t;
  }
  return total;
}

}  // namespace camp::env
