#include "camp/cartpole.hpp"

#include <cmath>
#include <string>

#include "camp/errors.hpp"

namespace camp::env {

CartpoleState reset(std::uint64_t seed) {
  Engine rng = make_stream(seed, "cartpole_reset");
  auto draw = [&] { return -0.05 + 0.1 * uniform_unit(rng); };
  CartpoleState s;
  s.x = draw();
  s.x_dot = draw();
  s.theta = draw();
  s.theta_dot = draw();
  return s;
}

StepResult step(const CartpoleState& state, Action action, const CartpoleParams& p) {
  if (state.done) {
    throw UsageError("cartpole: step called on a finished episode");
  }
  const double total_mass = p.cart_mass + p.pole_mass;
  const double pole_mass_length = p.pole_mass * p.half_length;
  const double force = action == Action::kRight ? p.force_mag : -p.force_mag;
  const double cos_t = std::cos(state.theta);
  const double sin_t = std::sin(state.theta);

  const double temp = (force + pole_mass_length * state.theta_dot * state.theta_dot * sin_t) / total_mass;
  const double theta_acc = (p.gravity * sin_t - cos_t * temp) /
                           (p.half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;

  StepResult r;
  r.next.x = state.x + p.dt * state.x_dot;
  r.next.x_dot = state.x_dot + p.dt * x_acc;
  r.next.theta = state.theta + p.dt * state.theta_dot;
  r.next.theta_dot = state.theta_dot + p.dt * theta_acc;
  r.next.step_index = state.step_index + 1;
  r.done = std::abs(r.next.x) > p.x_threshold || std::abs(r.next.theta) > p.theta_threshold ||
           r.next.step_index >= p.max_steps;
  r.next.done = r.done;
  r.reward = 1.0;
  return r;
}

FrameStack::FrameStack(std::size_t frames) : frames_(frames) {
  if (frames == 0) {
    throw UsageError("FrameStack needs at least one frame");
  }
}

void FrameStack::reset(const CartpoleState& state) {
  buffer_.assign(frames_, state.observation());
}

void FrameStack::push(const CartpoleState& state) {
  if (buffer_.empty()) {
    reset(state);
    return;
  }
  buffer_.pop_front();
  buffer_.push_back(state.observation());
}

Eigen::VectorXd FrameStack::flat() const {
  if (buffer_.empty()) {
    throw UsageError("FrameStack::flat before reset");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(dim()));
  Eigen::Index k = 0;
  for (const auto& frame : buffer_) {
    for (double v : frame) out(k++) = v;
  }
  return out;
}

NoiseSpec::NoiseSpec(double s) : sigma(s) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw DomainError("noise sigma must be finite and >= 0");
  }
}

Eigen::VectorXd sample_noise(std::size_t dim, const NoiseSpec& noise, Engine& rng) {
  Eigen::VectorXd eps = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  if (noise.sigma > 0.0) {
    for (Eigen::Index i = 0; i < eps.size(); ++i) {
      eps(i) = noise.sigma * standard_normal(rng);
    }
  }
  return eps;
}

Eigen::VectorXd observe(const FrameStack& stack, const NoiseSpec& noise, Engine& rng) {
  return stack.flat() + sample_noise(stack.dim(), noise, rng);
}

EnvConfig EnvConfig::from_name(const std::string& name) {
  EnvConfig cfg;
  if (name == "cartpole1") {
    cfg.frames = 1;
  } else if (name == "cartpole5") {
    cfg.frames = 5;
  } else {
    throw ConfigError("unknown environment '" + name + "' (expected cartpole1 or cartpole5)");
  }
  return cfg;
}

CartpoleEnv::CartpoleEnv(EnvConfig config) : config_(config), stack_(config.frames) {}

const Eigen::VectorXd& CartpoleEnv::reset(std::uint64_t seed) {
  state_ = env::reset(seed);
  stack_.reset(state_);
  obs_ = stack_.flat();
  return obs_;
}

StepResult CartpoleEnv::step(Action action) {
  StepResult r = env::step(state_, action, config_.params);
  state_ = r.next;
  stack_.push(state_);
  obs_ = stack_.flat();
  return r;
}

}  // namespace camp::env
