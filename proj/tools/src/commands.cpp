#include "camp/cli/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "camp/checkpoint.hpp"
#include "camp/errors.hpp"
#include "camp/parallel.hpp"
#include "camp/rollout.hpp"

namespace camp::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::ostream& log_of(const CommandContext& ctx) {
  return ctx.log ? *ctx.log : std::cout;
}

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

nn::Checkpoint load_for(const CommandContext& ctx) {
  const fs::path path = checkpoint_path(ctx);
  nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.net.input_dim() != ctx.config.train.env.obs_dim()) {
    throw ConfigError("checkpoint '" + path.string() + "' expects " + std::to_string(ck.net.input_dim()) +
                      " inputs but env.name=" + ctx.config.env_name + " produces " +
                      std::to_string(ctx.config.train.env.obs_dim()));
  }
  if (ck.meta.sigma != ctx.config.sigma()) {
    log_of(ctx) << "note: checkpoint trained with sigma=" << fmt9(ck.meta.sigma)
                << ", running with sigma=" << fmt9(ctx.config.sigma()) << '\n';
  }
  return ck;
}

std::string method_name(const CommandContext& ctx) {
  return train::to_string(ctx.config.method());
}

}  // namespace

fs::path resolve_out_dir(const std::optional<fs::path>& flag, const RunConfig& cfg) {
  if (flag) return *flag;
  if (cfg.out_dir) return *cfg.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return "runs";
}

fs::path checkpoint_path(const CommandContext& ctx) {
  if (ctx.config.checkpoint) return *ctx.config.checkpoint;
  return ctx.out_dir / (method_name(ctx) + "_primary.json");
}

void cmd_train(const CommandContext& ctx) {
  train::TrainConfig tc = ctx.config.train;
  tc.threads = ctx.threads;
  // Fail on an unwritable directory before spending time training.
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec || !fs::is_directory(ctx.out_dir)) throw IoError("cannot create output directory '" + ctx.out_dir.string() + "'");

  auto& log = log_of(ctx);
  train::TrainHooks hooks;
  hooks.on_validation = [&log](const train::ValidationPoint& v) {
    log << "step " << v.step << " validation return " << fmt9(v.mean_return) << " epsilon " << fmt9(v.epsilon)
        << '\n' << std::flush;
  };
  train::TrainResult result = train::train(tc, hooks);
  const std::string method = train::to_string(tc.method);
  nn::CheckpointMeta meta{method, tc.sigma, tc.loss.lambda, tc.seed, result.report.selected_step};
  const fs::path primary = ctx.config.checkpoint.value_or(ctx.out_dir / (method + "_primary.json"));
  nn::save_checkpoint(primary, result.primary, meta);
  if (result.reference) {
    nn::save_checkpoint(ctx.out_dir / (method + "_reference.json"), *result.reference, meta);
  }
  write_text(ctx.out_dir / (method + "_train_log.csv"), train::training_log_csv(result.report));

  const double last = result.report.validations.empty() ? 0.0 : result.report.validations.back().mean_return;
  log << "trained " << method << " for " << result.report.steps_run << " steps ("
      << result.report.gradient_updates << " updates" << (result.report.early_stopped ? ", early stop" : "")
      << ")\n";
  log << "final validation return " << fmt9(last) << '\n';
  log << "weights from step " << result.report.selected_step << '\n';
  log << "checkpoint " << primary.string() << '\n';
}

void cmd_certify(const CommandContext& ctx) {
  const nn::Checkpoint ck = load_for(ctx);
  const auto& c = ctx.config.certify;
  if (!(ctx.config.sigma() > 0.0)) {
    bool nonzero = false;
    for (double t : c.tau_grid) nonzero = nonzero || t > 0.0;
    if (nonzero) throw DomainError("certification at tau > 0 needs sigma > 0");
  }
  const cert::ReturnSample sample =
      cert::collect_returns(ck.net, ctx.config.train.env, ctx.config.sigma(), c.episodes, ctx.config.seed(), ctx.threads);
  const cert::CertCurve curve = cert::certify_curve(sample, c.alpha, ctx.config.sigma(), c.tau_grid, c.mode);
  write_text(ctx.out_dir / "certify.csv", cert::curve_csv(curve, method_name(ctx)));
  write_text(ctx.out_dir / "returns.csv", cert::returns_csv(sample.episode_returns()));

  const double max_return = static_cast<double>(ctx.config.train.env.params.max_steps);
  auto& log = log_of(ctx);
  log << "mean smoothed return " << fmt9(sample.mean()) << " over " << sample.m() << " episodes\n";
  if (ctx.config.sigma() > 0.0) {
    const double tau50 = cert::crossing_radius(sample, c.alpha, ctx.config.sigma(), c.mode, 0.5 * max_return);
    log << "bound crosses " << fmt9(0.5 * max_return) << " at tau=" << fmt9(tau50) << '\n';
  }
}

void cmd_attack(const CommandContext& ctx) {
  const nn::Checkpoint ck = load_for(ctx);
  attack::AttackConfig ac = ctx.config.attack.attack;
  ac.sigma = ctx.config.sigma();
  ac.seed = ctx.config.seed();
  const auto rows = attack::attack_suite(ck.net, ctx.config.train.env, ac, ctx.config.attack.tau_grid, ctx.threads);
  write_text(ctx.out_dir / "attack.csv", attack::attack_csv(rows, ac));
  auto& log = log_of(ctx);
  for (const auto& r : rows) {
    log << attack::to_string(ac.inner) << " tau=" << fmt9(r.tau) << " mean return " << fmt9(r.mean_return)
        << " (std " << fmt9(r.std_return) << ")\n";
  }
}

namespace {

train::EvalResult run_eval(const CommandContext& ctx, const nn::QNetwork& net) {
  return train::evaluate(net, ctx.config.train.env, ctx.config.sigma(), ctx.config.eval_episodes, ctx.config.seed(),
                         ctx.threads);
}

// Per-episode minimum Q-gap on the same episode streams as evaluate().
std::vector<double> episode_min_gaps(const CommandContext& ctx, const nn::QNetwork& net) {
  const auto n = static_cast<std::size_t>(ctx.config.eval_episodes);
  std::vector<double> gaps(n);
  parallel_for(n, ctx.threads, [&](std::size_t i) {
    double g = std::numeric_limits<double>::infinity();
    env::greedy_episode(net, ctx.config.train.env, ctx.config.sigma(), ctx.config.seed(), i,
                        [&](const env::StepView& v) { g = std::min(g, nn::q_gap(*v.q_values)); });
    gaps[i] = g;
  });
  return gaps;
}

}  // namespace

void cmd_eval(const CommandContext& ctx) {
  const nn::Checkpoint ck = load_for(ctx);
  const train::EvalResult ev = run_eval(ctx, ck.net);
  const std::vector<double> gaps = episode_min_gaps(ctx, ck.net);
  std::ostringstream os;
  os << "episode,return,min_q_gap\n";
  for (std::size_t i = 0; i < ev.returns.size(); ++i) {
    os << i << ',' << fmt9(ev.returns[i]) << ',' << fmt9(gaps[i]) << '\n';
  }
  write_text(ctx.out_dir / "eval.csv", os.str());
  log_of(ctx) << "mean return " << fmt9(ev.mean_return) << " over " << ev.returns.size() << " episodes\n";
}

void cmd_qgap(const CommandContext& ctx) {
  const nn::Checkpoint ck = load_for(ctx);
  const std::vector<double> gaps = episode_min_gaps(ctx, ck.net);
  double overall = std::numeric_limits<double>::infinity();
  std::ostringstream os;
  os << "episode,min_q_gap\n";
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    overall = std::min(overall, gaps[i]);
    os << i << ',' << fmt9(gaps[i]) << '\n';
  }
  write_text(ctx.out_dir / "qgap.csv", os.str());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", overall);
  log_of(ctx) << "min q-gap " << buf << " over " << gaps.size() << " episodes\n";
}

void cmd_radii(const CommandContext& ctx) {
  const nn::Checkpoint ck = load_for(ctx);
  if (!(ctx.config.sigma() > 0.0)) throw DomainError("radii need sigma > 0");
  const auto& r = ctx.config.radii;
  const cert::RadiusReport rep = cert::compute_radii(ck.net, ctx.config.train.env, ctx.config.sigma(), r.episodes,
                                                     ctx.config.seed(), r.query, ctx.threads);
  std::ostringstream os;
  os << "episode,step,q_top1,q_top2,local_radius\n";
  for (const auto& s : rep.local) {
    os << s.episode << ',' << s.step << ',' << fmt9(s.q_top1) << ',' << fmt9(s.q_top2) << ',' << fmt9(s.radius)
       << '\n';
  }
  write_text(ctx.out_dir / "radii.csv", os.str());
  auto& log = log_of(ctx);
  auto opt = [](const std::optional<double>& v) { return v ? fmt9(*v) : std::string("infeasible"); };
  log << "expected return " << fmt9(rep.expected_return) << '\n';
  log << "certified radius (xi=" << fmt9(r.query.xi) << ") " << opt(rep.threshold_radius) << '\n';
  log << "soft radius " << opt(rep.soft_radius) << '\n';
  double min_local = std::numeric_limits<double>::infinity();
  double mean_local = 0.0;
  for (const auto& s : rep.local) {
    min_local = std::min(min_local, s.radius);
    mean_local += s.radius;
  }
  if (!rep.local.empty()) {
    log << "local radius min " << fmt9(min_local) << " mean " << fmt9(mean_local / static_cast<double>(rep.local.size()))
        << '\n';
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified-radius training, certification and attacks for cart-pole DQN agents", "camp"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::optional<std::string> out_dir;
  std::optional<std::string> checkpoint;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"train", "train a CAMP or Gaussian agent and write checkpoints"},
      {"certify", "certified expected return over a budget grid"},
      {"attack", "budgeted PGD/APGD attack over a budget grid"},
      {"eval", "mean return of greedy smoothed play"},
      {"qgap", "minimal Q-gap over evaluation episodes"},
      {"radii", "certified, soft and local radii"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--checkpoint", checkpoint, "checkpoint path");
  }
  std::string keys_help = "\nConfig keys:\n";
  for (const auto& [k, h] : config_keys()) keys_help += "  " + k + "  " + h + "\n";
  app.footer(keys_help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    CommandContext ctx;
    ctx.config = load_config(config_path);
    if (seed) ctx.config.set_seed(*seed);
    if (checkpoint) ctx.config.checkpoint = fs::path(*checkpoint);
    ctx.threads = threads;
    ctx.config.set_threads(threads);
    ctx.out_dir = resolve_out_dir(out_dir ? std::optional<fs::path>(*out_dir) : std::nullopt, ctx.config);
    ctx.log = &out;

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "train") cmd_train(ctx);
    else if (name == "certify") cmd_certify(ctx);
    else if (name == "attack") cmd_attack(ctx);
    else if (name == "eval") cmd_eval(ctx);
    else if (name == "qgap") cmd_qgap(ctx);
    else cmd_radii(ctx);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DomainError& e) {
    err << "numeric domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace camp::cli
