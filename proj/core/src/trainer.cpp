#include "camp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "camp/errors.hpp"
#include "camp/parallel.hpp"
#include "camp/replay_buffer.hpp"
#include "camp/rollout.hpp"

namespace camp::train {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kMaxReturn = 200.0;

std::size_t explore_or_greedy(const nn::QNetwork& net, const Eigen::VectorXd& noisy_obs, bool random,
                              Engine& rng) {
  if (random) {
    return static_cast<std::size_t>(uniform_index(rng, env::kActionCount));
  }
  return nn::argmax(net.forward(noisy_obs));
}

// Shared bookkeeping between the two training loops.
// Weights kept from the best validation round.
struct Snapshot {
  nn::QNetwork primary;
  nn::QNetwork reference;
  std::int64_t step = 0;
};

class Runner {
 public:
  explicit Runner(const TrainConfig& cfg)
      : cfg_(cfg),
        env_(cfg.env),
        noise_(cfg.sigma),
        explore_rng_(make_stream(cfg.seed, "explore")),
        noise_rng_(make_stream(cfg.seed, "train_noise")),
        replay_rng_(make_stream(cfg.seed, "replay")) {
    env_.reset(stream_seed(cfg.seed, "train_reset", episodes_++));
  }

  // Acts once with `net` (or randomly) and returns the stored transition.
  replay::Transition act(std::int64_t t, const nn::QNetwork& net) {
    const std::size_t dim = cfg_.env.obs_dim();
    replay::Transition tr;
    tr.s = env_.clean_observation();
    tr.eps = env::sample_noise(dim, noise_, noise_rng_);
    tr.eps_next = env::sample_noise(dim, noise_, noise_rng_);
    bool random = t < cfg_.burn_in;
    if (!random) {
      random = uniform_unit(explore_rng_) < epsilon_at(t, cfg_);
    }
    const Eigen::VectorXd noisy = tr.s + tr.eps;
    const std::size_t a = explore_or_greedy(net, noisy, random, explore_rng_);
    const env::StepResult r = env_.step(static_cast<env::Action>(a));
    tr.s_next = env_.clean_observation();
    tr.action = static_cast<int>(a);
    tr.reward = r.reward;
    tr.done = r.done;
    if (r.done) {
      env_.reset(stream_seed(cfg_.seed, "train_reset", episodes_++));
    }
    return tr;
  }

  bool train_now(std::int64_t t) const { return t >= cfg_.burn_in && (t + 1) % cfg_.train_freq == 0; }
  bool target_now(std::int64_t t) const { return t % cfg_.target_update_freq == 0; }
  bool validate_now(std::int64_t t) const { return (t + 1) % cfg_.validation_every == 0; }

  struct Verdict {
    bool stop = false;
    bool best = false;  // strictly better than every earlier round
  };

  Verdict validate(std::int64_t t, const nn::QNetwork& net, double eta, TrainReport& report, const TrainHooks& hooks) {
    const EvalResult ev = evaluate(net, cfg_.env, cfg_.sigma, cfg_.validation_episodes,
                                   stream_seed(cfg_.seed, "validation", validation_round_++), cfg_.threads);
    report.validations.push_back({t + 1, ev.mean_return, epsilon_at(t, cfg_), eta});
    if (hooks.on_validation) hooks.on_validation(report.validations.back());
    const bool best = ev.mean_return > best_return_;
    best_return_ = std::max(best_return_, ev.mean_return);
    return {cfg_.early_stop && ev.mean_return == kMaxReturn, best};
  }

  Engine& replay_rng() { return replay_rng_; }

 private:
  const TrainConfig& cfg_;
  env::CartpoleEnv env_;
  env::NoiseSpec noise_;
  Engine explore_rng_;
  Engine noise_rng_;
  Engine replay_rng_;
  std::uint64_t episodes_ = 0;
  std::uint64_t validation_round_ = 0;
  double best_return_ = -1.0;
};

nn::QNetwork init_network(const TrainConfig& cfg, Engine& rng) {
  return nn::QNetwork::make_mlp(cfg.env.obs_dim(), cfg.hidden, env::kActionCount, rng);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string to_string(Method m) {
  return m == Method::kCamp ? "camp" : "gaussian";
}

Method method_from_string(const std::string& name) {
  if (name == "camp") return Method::kCamp;
  if (name == "gaussian") return Method::kGaussian;
  throw ConfigError("unknown method '" + name + "' (expected camp or gaussian)");
}

TrainConfig TrainConfig::full_preset() {
  TrainConfig c;
  c.total_steps = 500000;
  c.batch_size = 1024;
  c.lr = 5e-5;
  return c;
}

TrainConfig TrainConfig::desk_preset() {
  TrainConfig c;
  c.total_steps = 150000;
  c.batch_size = 256;
  c.lr = 5e-5;
  return c;
}

void TrainConfig::validate() const {
  if (total_steps < 0) throw ConfigError("train.total_steps must be >= 0");
  if (burn_in < 0 || (total_steps > 0 && burn_in >= total_steps)) {
    throw ConfigError("train.burn_in must satisfy 0 <= burn_in < total_steps");
  }
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("train.lr must be >= 0");
  if (train_freq < 1) throw ConfigError("train.train_freq must be >= 1");
  if (grad_steps_per_train < 1) throw ConfigError("train.grad_steps_per_train must be >= 1");
  if (target_update_freq < 1) throw ConfigError("train.target_update_freq must be >= 1");
  if (!(polyak >= 0.0 && polyak <= 1.0)) throw ConfigError("train.polyak must lie in [0, 1]");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
  if (!(epsilon.fraction > 0.0 && epsilon.fraction <= 1.0)) {
    throw ConfigError("train.eps_fraction must lie in (0, 1]");
  }
  if (!(epsilon.start >= 0.0 && epsilon.start <= 1.0 && epsilon.end >= 0.0 && epsilon.end <= 1.0)) {
    throw ConfigError("train.eps_start and train.eps_end must lie in [0, 1]");
  }
  if (validation_every < 1) throw ConfigError("train.validation_every must be >= 1");
  if (validation_episodes < 1) throw ConfigError("train.validation_episodes must be >= 1");
  if (buffer_capacity < 1) throw ConfigError("train.buffer_capacity must be >= 1");
  if (hidden.empty()) throw ConfigError("train.hidden must name at least one layer");
  loss.validate();
}

double epsilon_at(std::int64_t t, const TrainConfig& cfg) {
  const double horizon = cfg.epsilon.fraction * static_cast<double>(cfg.total_steps);
  if (horizon <= 0.0) return cfg.epsilon.end;
  const double progress = std::min(1.0, static_cast<double>(t) / horizon);
  return cfg.epsilon.start + progress * (cfg.epsilon.end - cfg.epsilon.start);
}

void polyak_update(nn::QNetwork& target, const nn::QNetwork& online, double k) {
  if (!(k >= 0.0 && k <= 1.0)) {
    throw DomainError("polyak rate must lie in [0, 1]");
  }
  auto& tl = target.layers();
  const auto& ol = online.layers();
  if (tl.size() != ol.size()) {
    throw UsageError("polyak_update: layer counts differ");
  }
  for (std::size_t i = 0; i < tl.size(); ++i) {
    if (tl[i].weight.rows() != ol[i].weight.rows() || tl[i].weight.cols() != ol[i].weight.cols()) {
      throw UsageError("polyak_update: layer shapes differ");
    }
    if (k == 1.0) {
      tl[i] = ol[i];
    } else {
      tl[i].weight = k * ol[i].weight + (1.0 - k) * tl[i].weight;
      tl[i].bias = k * ol[i].bias + (1.0 - k) * tl[i].bias;
    }
  }
}

TrainResult train_camp(const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (cfg.method != Method::kCamp) {
    throw ConfigError("train_camp called with method " + to_string(cfg.method));
  }
  const auto start = Clock::now();
  Engine init_rng = make_stream(cfg.seed, "init");
  TrainResult result{init_network(cfg, init_rng), init_network(cfg, init_rng), {}};
  nn::QNetwork& primary = result.primary;
  nn::QNetwork& reference = *result.reference;
  nn::QNetwork reference_target = reference;
  nn::AdamState primary_opt = nn::AdamState::for_network(primary, cfg.lr);
  nn::AdamState reference_opt = nn::AdamState::for_network(reference, cfg.lr);

  const std::size_t dim = cfg.env.obs_dim();
  replay::ReplayBuffer primary_store(cfg.buffer_capacity, dim);    // ut batches
  replay::ReplayBuffer reference_store(cfg.buffer_capacity, dim);  // ro + im batches

  Runner runner(cfg);
  Snapshot best;
  double last_eta = 0.0;
  TrainReport& report = result.report;
  for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
    const bool even = t % 2 == 0;
    replay::Transition tr = runner.act(t, even ? primary : reference);
    (even ? primary_store : reference_store).push(std::move(tr));
    if (hooks.on_store) hooks.on_store(t, even ? 0 : 1);

    if (runner.train_now(t) && !primary_store.empty() && !reference_store.empty()) {
      for (int g = 0; g < cfg.grad_steps_per_train; ++g) {
        const auto batch_ref = primary_store.sample_refs(cfg.batch_size, runner.replay_rng());
        const auto batch_primary = reference_store.sample_refs(cfg.batch_size, runner.replay_rng());
        const loss::CampLoss l =
            loss::camp_loss(primary, reference, reference_target, batch_ref, batch_primary, cfg.loss);
        nn::adam_step(reference_opt, reference, l.reference_grad);
        nn::adam_step(primary_opt, primary, l.primary_grad);
        last_eta = l.eta;
        ++report.gradient_updates;
        if (hooks.on_camp_update) hooks.on_camp_update(l);
      }
    }
    if (runner.target_now(t)) {
      polyak_update(reference_target, reference, cfg.polyak);
    }
    report.steps_run = t + 1;
    if (runner.validate_now(t)) {
      const auto v = runner.validate(t, primary, last_eta, report, hooks);
      if (v.best && cfg.keep_best) best = {primary, reference, t + 1};
      if (v.stop) {
        report.early_stopped = true;
        break;
      }
    }
  }
  report.selected_step = report.steps_run;
  if (cfg.keep_best && best.step > 0) {
    result.primary = std::move(best.primary);
    result.reference = std::move(best.reference);
    report.selected_step = best.step;
  }
  report.wall_clock_seconds = seconds_since(start);
  return result;
}

TrainResult train_gaussian(const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (cfg.method != Method::kGaussian) {
    throw ConfigError("train_gaussian called with method " + to_string(cfg.method));
  }
  const auto start = Clock::now();
  Engine init_rng = make_stream(cfg.seed, "init");
  TrainResult result{init_network(cfg, init_rng), std::nullopt, {}};
  nn::QNetwork& net = result.primary;
  nn::QNetwork target = net;
  nn::AdamState opt = nn::AdamState::for_network(net, cfg.lr);
  replay::ReplayBuffer store(cfg.buffer_capacity, cfg.env.obs_dim());

  Runner runner(cfg);
  Snapshot best;
  TrainReport& report = result.report;
  nn::GradientSet grad = net.zero_gradients();
  for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
    store.push(runner.act(t, net));
    if (hooks.on_store) hooks.on_store(t, 0);
    if (runner.train_now(t)) {
      for (int g = 0; g < cfg.grad_steps_per_train; ++g) {
        const auto batch = store.sample_refs(cfg.batch_size, runner.replay_rng());
        grad.set_zero();
        loss::utility_loss_batch(net, target, batch, cfg.loss.gamma, grad);
        nn::adam_step(opt, net, grad);
        ++report.gradient_updates;
      }
    }
    if (runner.target_now(t)) {
      polyak_update(target, net, cfg.polyak);
    }
    report.steps_run = t + 1;
    if (runner.validate_now(t)) {
      const auto v = runner.validate(t, net, 0.0, report, hooks);
      if (v.best && cfg.keep_best) best = {net, net, t + 1};
      if (v.stop) {
        report.early_stopped = true;
        break;
      }
    }
  }
  report.selected_step = report.steps_run;
  if (cfg.keep_best && best.step > 0) {
    result.primary = std::move(best.primary);
    report.selected_step = best.step;
  }
  report.wall_clock_seconds = seconds_since(start);
  return result;
}

TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks) {
  return cfg.method == Method::kCamp ? train_camp(cfg, hooks) : train_gaussian(cfg, hooks);
}

EvalResult evaluate(const nn::QNetwork& net, const env::EnvConfig& env_cfg, double sigma, int episodes,
                    std::uint64_t seed, unsigned threads) {
  if (episodes < 1) {
    throw UsageError("evaluate needs at least one episode");
  }
  if (net.action_dim() != env::kActionCount || net.input_dim() != env_cfg.obs_dim()) {
    throw UsageError("network shape does not match the environment");
  }
  const auto n = static_cast<std::size_t>(episodes);
  std::vector<double> returns(n);
  std::vector<double> gaps(n, std::numeric_limits<double>::infinity());
  parallel_for(n, threads, [&](std::size_t i) {
    returns[i] = env::greedy_episode(net, env_cfg, sigma, seed, i, [&](const env::StepView& v) {
      gaps[i] = std::min(gaps[i], nn::q_gap(*v.q_values));
    });
  });
  EvalResult out;
  out.returns = std::move(returns);
  double sum = 0.0;
  for (double r : out.returns) sum += r;
  out.mean_return = sum / static_cast<double>(n);
  out.min_q_gap = *std::min_element(gaps.begin(), gaps.end());
  return out;
}

std::string training_log_csv(const TrainReport& report) {
  std::ostringstream os;
  os.precision(9);
  os << "step,mean_validation_return,epsilon,eta\n";
  for (const auto& v : report.validations) {
    os << v.step << ',' << v.mean_return << ',' << v.epsilon << ',' << v.eta << '\n';
  }
  return os.str();
}

}  // namespace camp::train
