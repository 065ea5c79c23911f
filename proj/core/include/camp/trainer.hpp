#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "camp/cartpole.hpp"
#include "camp/losses.hpp"
#include "camp/network.hpp"

namespace camp::train {

enum class Method { kCamp, kGaussian };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.0;
  double fraction = 0.16;
};

struct TrainConfig {
  Method method = Method::kCamp;
  env::EnvConfig env{};
  std::int64_t total_steps = 150000;
  std::int64_t burn_in = 1000;
  std::size_t batch_size = 256;
  double lr = 5e-5;
  std::int64_t train_freq = 256;
  int grad_steps_per_train = 128;
  std::int64_t target_update_freq = 10;
  double polyak = 1.0;
  double sigma = 0.0;
  loss::LossConfig loss{};
  EpsilonSchedule epsilon{};
  std::int64_t validation_every = 2000;
  int validation_episodes = 10;
  std::uint64_t seed = 0;
  std::size_t buffer_capacity = 100000;
  std::vector<std::size_t> hidden{256, 256};
  bool early_stop = true;
  // Deploy the weights from the best validation round rather than the last.
  bool keep_best = true;
  unsigned threads = 1;

  // Full-scale cart-pole settings: batch 1024, 500k steps.
  static TrainConfig full_preset();
  // CPU-sized variant: batch 256, 150k steps.
  static TrainConfig desk_preset();

  void validate() const;
};

struct ValidationPoint {
  std::int64_t step = 0;
  double mean_return = 0.0;
  double epsilon = 0.0;
  double eta = 0.0;
};

struct TrainReport {
  std::vector<ValidationPoint> validations;
  std::int64_t steps_run = 0;
  std::int64_t gradient_updates = 0;
  bool early_stopped = false;
  std::int64_t selected_step = 0;  // step whose weights were returned
  double wall_clock_seconds = 0.0;
  std::vector<std::string> checkpoint_paths;
};

struct TrainResult {
  nn::QNetwork primary;                  // the policy to deploy
  std::optional<nn::QNetwork> reference; // CAMP only
  TrainReport report;
};

// Optional observation points, used by tests to check buffer routing and
// gradient separation.
struct TrainHooks {
  // buffer 0 = primary-acting store, 1 = reference-acting store.
  std::function<void(std::int64_t step, int buffer)> on_store;
  std::function<void(const loss::CampLoss&)> on_camp_update;
  std::function<void(const ValidationPoint&)> on_validation;
};

double epsilon_at(std::int64_t t, const TrainConfig& cfg);

// target <- k * online + (1 - k) * target
void polyak_update(nn::QNetwork& target, const nn::QNetwork& online, double k);

TrainResult train_camp(const TrainConfig& cfg, const TrainHooks& hooks = {});
TrainResult train_gaussian(const TrainConfig& cfg, const TrainHooks& hooks = {});
TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks = {});

struct EvalResult {
  double mean_return = 0.0;
  std::vector<double> returns;
  double min_q_gap = 0.0;
};

// Greedy play on noisy observations; min_q_gap is the smallest top-1 minus
// runner-up Q-value over every step of every episode.
EvalResult evaluate(const nn::QNetwork& net, const env::EnvConfig& env_cfg, double sigma, int episodes,
                    std::uint64_t seed, unsigned threads = 1);

std::string training_log_csv(const TrainReport& report);

}  // namespace camp::train
