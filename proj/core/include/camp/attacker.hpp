#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "camp/cartpole.hpp"
#include "camp/network.hpp"

namespace camp::attack {

enum class InnerAttack { kPgd, kApgd };

std::string to_string(InnerAttack inner);
InnerAttack inner_attack_from_string(const std::string& name);

struct AttackConfig {
  double tau = 1.0;          // l2 budget over the whole episode
  InnerAttack inner = InnerAttack::kPgd;
  double step_size = 0.01;   // PGD step
  double beta = 2.0;         // iterations per step = floor(beta * c / step)
  double q_filter = 0.0;     // skip targets whose clean Q differs from the top by less than this
  double sigma = 0.0;        // smoothing noise on the attacked agent's observations
  int episodes = 1000;
  std::uint64_t seed = 0;

  double apgd_step_fraction = 0.05;  // APGD initial step = fraction * tau
  double apgd_momentum = 0.75;
  int apgd_window = 5;

  void validate() const;
  double initial_step() const;
};

// floor(beta * c / step_size); zero when either c or step_size is zero.
std::size_t attack_step_count(double remaining, double beta, double step_size);

// Running l2 budget with carry-over: c <- sqrt(c^2 - ||delta||^2).
struct AttackBudget {
  double tau = 0.0;
  double remaining = 0.0;
  std::vector<double> spent_log;  // ||delta_t|| per step, zero when unperturbed
  bool exhausted = false;

  explicit AttackBudget(double total);

  // Deducts ||delta||. Returns false and marks the budget exhausted when
  // the deduction would drive c^2 below zero beyond rounding; nothing is
  // charged in that case and the caller must not apply delta.
  bool spend(double delta_norm);
  double spent_total() const;
};

// Projects `point` onto the l2 ball of `radius` around `origin`.
Eigen::VectorXd project_l2_ball(const Eigen::VectorXd& origin, const Eigen::VectorXd& point, double radius);

// Inner-loop state for one target action at one environment step.
struct PerturbState {
  Eigen::VectorXd origin;   // observation the agent would see unperturbed
  Eigen::VectorXd current;  // adversarial candidate
  double radius = 0.0;      // budget c available at this step
  double step_size = 0.0;

  // APGD bookkeeping
  Eigen::VectorXd previous;
  bool has_previous = false;
  double best_loss = std::numeric_limits<double>::infinity();
  int since_improvement = 0;
  double momentum = 0.75;
  int window = 5;

  PerturbState(Eigen::VectorXd start, double budget, double step);
};

// Cross-entropy toward the one-hot target and its input gradient.
struct TargetedLoss {
  double loss = 0.0;
  Eigen::VectorXd input_grad;
  std::size_t predicted = 0;
};

TargetedLoss targeted_cross_entropy(const nn::QNetwork& net, const Eigen::VectorXd& obs, std::size_t target);

// One PGD step along the normalised negative gradient (or one APGD
// iteration with momentum and step halving), followed by projection onto
// the budget ball. A zero gradient or zero budget leaves `current` as is.
// Returns the loss at the point the step started from.
double perturb_step(const nn::QNetwork& net, PerturbState& state, std::size_t target, InnerAttack inner);

struct EpisodeAttack {
  double episode_return = 0.0;
  std::vector<Eigen::VectorXd> deltas;  // committed perturbation per step
  std::vector<int> actions;
  AttackBudget budget{0.0};
};

// Budget-carrying attack on one episode. Each step tries every admissible
// target action, keeps the successful perturbation whose target has the
// lowest clean Q-value, and deducts its norm from the running budget.
// Episode streams match env::greedy_episode, so tau = 0 replays the clean
// rollout.
EpisodeAttack attack_episode(const nn::QNetwork& net, const env::EnvConfig& env_cfg, const AttackConfig& cfg,
                             std::uint64_t episode);

struct AttackRow {
  double tau = 0.0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double max_budget_used = 0.0;  // largest sqrt(sum ||delta||^2) over episodes
};

std::vector<AttackRow> attack_suite(const nn::QNetwork& net, const env::EnvConfig& env_cfg,
                                    const AttackConfig& cfg, std::span<const double> budgets,
                                    unsigned threads = 1);

// tau,mean_return,std_return,attack,sigma,episodes,seed
std::string attack_csv(std::span<const AttackRow> rows, const AttackConfig& cfg);

}  // namespace camp::attack
