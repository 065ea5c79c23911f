#include "camp/attacker.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "camp/errors.hpp"
#include "camp/parallel.hpp"
#include "camp/rollout.hpp"

namespace camp::attack {

namespace {

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string to_string(InnerAttack inner) {
  return inner == InnerAttack::kPgd ? "pgd" : "apgd";
}

InnerAttack inner_attack_from_string(const std::string& name) {
  if (name == "pgd") return InnerAttack::kPgd;
  if (name == "apgd") return InnerAttack::kApgd;
  throw ConfigError("unknown attack '" + name + "' (expected pgd or apgd)");
}

void AttackConfig::validate() const {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("attack budget tau must be >= 0");
  if (!(beta > 0.0)) throw ConfigError("attack.beta must be > 0");
  if (!(step_size > 0.0)) throw ConfigError("attack.step_size must be > 0");
  if (!(q_filter >= 0.0)) throw ConfigError("attack.q_filter must be >= 0");
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
  if (episodes < 1) throw ConfigError("attack.episodes must be >= 1");
  if (!(apgd_step_fraction > 0.0)) throw ConfigError("attack.apgd_step_fraction must be > 0");
  if (!(apgd_momentum >= 0.0 && apgd_momentum <= 1.0)) throw ConfigError("attack.apgd_momentum must lie in [0, 1]");
  if (apgd_window < 1) throw ConfigError("attack.apgd_window must be >= 1");
}

double AttackConfig::initial_step() const {
  return inner == InnerAttack::kApgd ? apgd_step_fraction * tau : step_size;
}

std::size_t attack_step_count(double remaining, double beta, double step_size) {
  if (!(remaining > 0.0) || !(step_size > 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(beta * remaining / step_size));
}

AttackBudget::AttackBudget(double total) : tau(total), remaining(total) {
  if (!(total >= 0.0)) throw UsageError("attack budget must be >= 0");
}

bool AttackBudget::spend(double delta_norm) {
  if (exhausted) {
    spent_log.push_back(0.0);
    return delta_norm == 0.0;
  }
  double left = remaining * remaining - delta_norm * delta_norm;
  if (left < 0.0) {
    // Projection rounding is tolerated; anything larger ends the attack.
    if (left < -1e-12 * std::max(1.0, tau * tau)) {
      exhausted = true;
      spent_log.push_back(0.0);
      return false;
    }
    left = 0.0;
  }
  remaining = std::sqrt(left);
  spent_log.push_back(delta_norm);
  return true;
}

double AttackBudget::spent_total() const {
  double sq = 0.0;
  for (double d : spent_log) sq += d * d;
  return std::sqrt(sq);
}

Eigen::VectorXd project_l2_ball(const Eigen::VectorXd& origin, const Eigen::VectorXd& point, double radius) {
  const Eigen::VectorXd delta = point - origin;
  const double norm = delta.norm();
  if (norm <= radius) return point;
  if (radius <= 0.0) return origin;
  return origin + delta * (radius / norm);
}

PerturbState::PerturbState(Eigen::VectorXd start, double budget, double step)
    : origin(start), current(std::move(start)), radius(budget), step_size(step) {}

TargetedLoss targeted_cross_entropy(const nn::QNetwork& net, const Eigen::VectorXd& obs, std::size_t target) {
  if (target >= net.action_dim()) {
    throw UsageError("target action out of range");
  }
  const nn::BatchTrace trace = net.trace_batch(obs);
  const Eigen::VectorXd logits = trace.output.col(0);
  Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(logits.size());
  one_hot(static_cast<Eigen::Index>(target)) = 1.0;
  const nn::CrossEntropy ce = nn::softmax_cross_entropy(logits, one_hot);
  nn::Matrix input_grad;
  net.backward_batch(trace, nn::Matrix(ce.logit_grad), nullptr, &input_grad);
  return {ce.loss, input_grad.col(0), nn::argmax(logits)};
}

double perturb_step(const nn::QNetwork& net, PerturbState& s, std::size_t target, InnerAttack inner) {
  const TargetedLoss l = targeted_cross_entropy(net, s.current, target);
  const double gnorm = l.input_grad.norm();
  if (s.radius <= 0.0 || gnorm == 0.0 || !std::isfinite(gnorm)) {
    return l.loss;
  }
  const Eigen::VectorXd z = project_l2_ball(s.origin, s.current - s.step_size * l.input_grad / gnorm, s.radius);
  if (inner == InnerAttack::kPgd) {
    s.current = z;
    return l.loss;
  }

  // APGD: no random start; momentum after the first iterate; the step is
  // halved whenever the best loss has not improved for `window` iterations.
  if (l.loss < s.best_loss) {
    s.best_loss = l.loss;
    s.since_improvement = 0;
  } else if (++s.since_improvement >= s.window) {
    s.step_size *= 0.5;
    s.since_improvement = 0;
  }
  Eigen::VectorXd next = z;
  if (s.has_previous) {
    next = project_l2_ball(
        s.origin, s.current + s.momentum * (z - s.current) + (1.0 - s.momentum) * (s.current - s.previous),
        s.radius);
  }
  s.previous = s.current;
  s.has_previous = true;
  s.current = std::move(next);
  return l.loss;
}

EpisodeAttack attack_episode(const nn::QNetwork& net, const env::EnvConfig& env_cfg, const AttackConfig& cfg,
                             std::uint64_t episode) {
  cfg.validate();
  if (net.input_dim() != env_cfg.obs_dim() || net.action_dim() != env::kActionCount) {
    throw UsageError("network shape does not match the environment");
  }
  env::EpisodeStreams streams = env::EpisodeStreams::derive(cfg.seed, episode);
  const env::NoiseSpec noise(cfg.sigma);
  env::CartpoleEnv env(env_cfg);
  env.reset(streams.reset_seed);

  EpisodeAttack out;
  out.budget = AttackBudget(cfg.tau);
  const double step = cfg.initial_step();
  while (!env.done()) {
    const Eigen::VectorXd clean = env.clean_observation();
    const Eigen::VectorXd origin = clean + env::sample_noise(clean.size(), noise, streams.noise);
    const Eigen::VectorXd q_clean = net.forward(origin);
    const std::size_t top = nn::argmax(q_clean);

    double best_q = q_clean(static_cast<Eigen::Index>(top));
    Eigen::VectorXd best_obs = origin;
    const double c = out.budget.remaining;
    const std::size_t iterations = out.budget.exhausted ? 0 : attack_step_count(c, cfg.beta, step);
    if (iterations > 0) {
      for (std::size_t target = 0; target < net.action_dim(); ++target) {
        const double q_target = q_clean(static_cast<Eigen::Index>(target));
        if (target == top || std::abs(q_target - q_clean(static_cast<Eigen::Index>(top))) < cfg.q_filter) {
          continue;
        }
        PerturbState state(origin, c, step);
        state.momentum = cfg.apgd_momentum;
        state.window = cfg.apgd_window;
        for (std::size_t i = 0; i < iterations; ++i) {
          if (nn::argmax(net.forward(state.current)) == target) {
            if (q_target < best_q) {
              best_q = q_target;
              best_obs = state.current;
            }
            break;
          }
          perturb_step(net, state, target, cfg.inner);
        }
      }
    }

    Eigen::VectorXd delta = best_obs - origin;
    if (!out.budget.spend(delta.norm())) {
      best_obs = origin;
      delta.setZero();
    }
    const std::size_t action = nn::argmax(net.forward(best_obs));
    out.deltas.push_back(std::move(delta));
    out.actions.push_back(static_cast<int>(action));
    out.episode_return += env.step(static_cast<env::Action>(action)).reward;
  }
  return out;
}

std::vector<AttackRow> attack_suite(const nn::QNetwork& net, const env::EnvConfig& env_cfg,
                                    const AttackConfig& cfg, std::span<const double> budgets, unsigned threads) {
  cfg.validate();
  std::vector<AttackRow> rows;
  for (double tau : budgets) {
    AttackConfig c = cfg;
    c.tau = tau;
    c.validate();
    const auto n = static_cast<std::size_t>(c.episodes);
    std::vector<double> returns(n);
    std::vector<double> used(n);
    parallel_for(n, threads, [&](std::size_t i) {
      const EpisodeAttack ep = attack_episode(net, env_cfg, c, i);
      returns[i] = ep.episode_return;
      used[i] = ep.budget.spent_total();
    });
    AttackRow row;
    row.tau = tau;
    double sum = 0.0;
    for (double r : returns) sum += r;
    row.mean_return = sum / static_cast<double>(n);
    double var = 0.0;
    for (double r : returns) var += (r - row.mean_return) * (r - row.mean_return);
    row.std_return = std::sqrt(var / static_cast<double>(n));
    for (double u : used) row.max_budget_used = std::max(row.max_budget_used, u);
    rows.push_back(row);
  }
  return rows;
}

std::string attack_csv(std::span<const AttackRow> rows, const AttackConfig& cfg) {
  std::ostringstream os;
  os << "tau,mean_return,std_return,attack,sigma,episodes,seed\n";
  for (const auto& r : rows) {
    os << fmt9(r.tau) << ',' << fmt9(r.mean_return) << ',' << fmt9(r.std_return) << ',' << to_string(cfg.inner)
       << ',' << fmt9(cfg.sigma) << ',' << cfg.episodes << ',' << cfg.seed << '\n';
  }
  return os.str();
}

}  // namespace camp::attack
