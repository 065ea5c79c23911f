#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <string>

#include <Eigen/Dense>

#include "camp/rng.hpp"

namespace camp::env {

// Physical constants of the classic cart-pole benchmark.
struct CartpoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double force_mag = 10.0;
  double dt = 0.02;
  double x_threshold = 2.4;
  double theta_threshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  int max_steps = 200;
};

struct CartpoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  int step_index = 0;
  bool done = false;

  std::array<double, 4> observation() const { return {x, x_dot, theta, theta_dot}; }
};

enum class Action : int { kLeft = 0, kRight = 1 };

inline constexpr std::size_t kStateDim = 4;
inline constexpr std::size_t kActionCount = 2;

struct StepResult {
  CartpoleState next;
  double reward = 0.0;
  bool done = false;
};

// Each state component uniform in [-0.05, 0.05), drawn from a stream
// derived from `seed`.
CartpoleState reset(std::uint64_t seed);

// Explicit Euler step. Reward is 1 for every step taken, including the
// terminating one, so returns lie in [1, max_steps]. Throws UsageError when
// called on a finished episode.
StepResult step(const CartpoleState& state, Action action, const CartpoleParams& params = {});

// The k most recent observations, oldest first, flattened to 4k values.
class FrameStack {
 public:
  explicit FrameStack(std::size_t frames);

  void reset(const CartpoleState& state);
  void push(const CartpoleState& state);

  std::size_t frames() const { return frames_; }
  std::size_t dim() const { return frames_ * kStateDim; }
  Eigen::VectorXd flat() const;

 private:
  std::size_t frames_;
  std::deque<std::array<double, 4>> buffer_;
};

struct NoiseSpec {
  double sigma = 0.0;

  explicit NoiseSpec(double s = 0.0);
};

// i.i.d. N(0, sigma^2) vector. With sigma == 0 no draws are consumed.
Eigen::VectorXd sample_noise(std::size_t dim, const NoiseSpec& noise, Engine& rng);

// Stacked clean observation plus fresh Gaussian noise on every coordinate.
Eigen::VectorXd observe(const FrameStack& stack, const NoiseSpec& noise, Engine& rng);

// Environment variant: cartpole1 (single frame) or cartpole5 (five frames).
struct EnvConfig {
  std::size_t frames = 1;
  CartpoleParams params{};

  std::size_t obs_dim() const { return frames * kStateDim; }
  static EnvConfig from_name(const std::string& name);
};

// Cart-pole plus its frame stack.
class CartpoleEnv {
 public:
  explicit CartpoleEnv(EnvConfig config);

  const Eigen::VectorXd& reset(std::uint64_t seed);
  StepResult step(Action action);

  const CartpoleState& state() const { return state_; }
  const FrameStack& stack() const { return stack_; }
  const EnvConfig& config() const { return config_; }
  bool done() const { return state_.done; }
  Eigen::VectorXd clean_observation() const { return stack_.flat(); }

 private:
  EnvConfig config_;
  CartpoleState state_;
  FrameStack stack_;
  Eigen::VectorXd obs_;
};

}  // namespace camp::env
