#include "camp/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "camp/errors.hpp"

namespace camp::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError(key + ": " + why);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad(key, "expected a number, got '" + v + "'");
  }
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, "expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    bad(key, "expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

std::int64_t at_least(const std::string& key, std::int64_t v, std::int64_t lo) {
  if (v < lo) bad(key, "must be >= " + std::to_string(lo));
  return v;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, "expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> to_grid(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) {
    const double t = to_double(key, item);
    if (t < 0.0) bad(key, "budgets must be >= 0");
    out.push_back(t);
  }
  if (out.empty()) bad(key, "must list at least one value");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

struct KeySpec {
  const char* key;
  const char* help;
  Setter set;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"env.name", "cartpole1 or cartpole5",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v != "cartpole1" && v != "cartpole5") bad(k, "expected cartpole1 or cartpole5");
         c.env_name = v;
         c.train.env = env::EnvConfig::from_name(v);
       }},
      {"method", "camp or gaussian",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v != "camp" && v != "gaussian") bad(k, "expected camp or gaussian");
         c.train.method = train::method_from_string(v);
       }},
      {"sigma", "observation noise std (>= 0)",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.sigma = to_double(k, v);
         if (c.train.sigma < 0.0) bad(k, "must be >= 0");
       }},
      {"lambda", "robustness-loss weight (>= 0)",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.loss.lambda = to_double(k, v);
         if (c.train.loss.lambda < 0.0) bad(k, "must be >= 0");
       }},
      {"seed", "master seed for every random stream",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.set_seed(to_uint(k, v)); }},
      {"out_dir", "directory for checkpoints and CSVs",
       [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
      {"checkpoint", "checkpoint read by certify/attack/eval/qgap/radii",
       [](RunConfig& c, const std::string&, const std::string& v) { c.checkpoint = v; }},

      {"train.total_steps", "environment steps",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.total_steps = at_least(k, to_int(k, v), 1);
       }},
      {"train.burn_in", "uniform-random steps before updates",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.burn_in = at_least(k, to_int(k, v), 0);
       }},
      {"train.batch_size", "minibatch size",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.batch_size = static_cast<std::size_t>(at_least(k, to_int(k, v), 1));
       }},
      {"train.lr", "Adam learning rate",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.lr = to_double(k, v);
         if (!(c.train.lr > 0.0)) bad(k, "must be > 0");
       }},
      {"train.train_freq", "environment steps between training phases",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.train_freq = at_least(k, to_int(k, v), 1);
       }},
      {"train.gradient_steps", "updates per training phase",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.grad_steps_per_train = static_cast<int>(at_least(k, to_int(k, v), 1));
       }},
      {"train.target_update_freq", "environment steps between target updates",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.target_update_freq = at_least(k, to_int(k, v), 1);
       }},
      {"train.polyak", "target update rate in (0, 1]",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.polyak = to_double(k, v);
         if (!(c.train.polyak > 0.0 && c.train.polyak <= 1.0)) bad(k, "must lie in (0, 1]");
       }},
      {"train.gamma", "discount factor in [0, 1]",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.loss.gamma = to_double(k, v);
         if (!(c.train.loss.gamma >= 0.0 && c.train.loss.gamma <= 1.0)) bad(k, "must lie in [0, 1]");
       }},
      {"train.eta", "hinge margin: adaptive (reference-net Q spread), adaptive_primary, or a positive number",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "adaptive") {
           c.train.loss.eta_mode = loss::EtaMode::kAdaptiveReference;
           return;
         }
         if (v == "adaptive_primary") {
           c.train.loss.eta_mode = loss::EtaMode::kAdaptive;
           return;
         }
         c.train.loss.eta_mode = loss::EtaMode::kFixed;
         c.train.loss.eta_fixed = to_double(k, v);
         if (!(c.train.loss.eta_fixed > 0.0)) bad(k, "must be adaptive or > 0");
       }},
      {"train.epsilon_start", "initial exploration rate",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.epsilon.start = to_double(k, v);
         if (!(c.train.epsilon.start >= 0.0 && c.train.epsilon.start <= 1.0)) bad(k, "must lie in [0, 1]");
       }},
      {"train.epsilon_end", "final exploration rate",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.epsilon.end = to_double(k, v);
         if (!(c.train.epsilon.end >= 0.0 && c.train.epsilon.end <= 1.0)) bad(k, "must lie in [0, 1]");
       }},
      {"train.epsilon_fraction", "share of training spent annealing epsilon",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.epsilon.fraction = to_double(k, v);
         if (!(c.train.epsilon.fraction > 0.0 && c.train.epsilon.fraction <= 1.0)) bad(k, "must lie in (0, 1]");
       }},
      {"train.validation_every", "steps between validation rounds",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.validation_every = at_least(k, to_int(k, v), 1);
       }},
      {"train.validation_episodes", "episodes per validation round",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.validation_episodes = static_cast<int>(at_least(k, to_int(k, v), 1));
       }},
      {"train.buffer_capacity", "replay capacity per buffer",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.train.buffer_capacity = static_cast<std::size_t>(at_least(k, to_int(k, v), 1));
       }},
      {"train.hidden", "hidden layer widths, comma separated",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         std::vector<std::size_t> dims;
         for (const auto& item : split_list(v)) dims.push_back(static_cast<std::size_t>(at_least(k, to_int(k, item), 1)));
         if (dims.empty()) bad(k, "must list at least one width");
         c.train.hidden = dims;
       }},
      {"train.early_stop", "stop once a validation round averages the maximum return",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.train.early_stop = to_bool(k, v); }},
      {"train.keep_best", "return the weights of the best validation round instead of the last",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.train.keep_best = to_bool(k, v); }},

      {"certify.episodes", "smoothed episodes in the return sample (>= 2)",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.certify.episodes = static_cast<std::size_t>(at_least(k, to_int(k, v), 2));
       }},
      {"certify.alpha", "confidence parameter in (0, 1)",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.certify.alpha = to_double(k, v);
         if (!(c.certify.alpha > 0.0 && c.certify.alpha < 1.0)) bad(k, "must lie in (0, 1)");
         c.radii.query.alpha = c.certify.alpha;
       }},
      {"certify.tau_grid", "budgets, comma separated",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.certify.tau_grid = to_grid(k, v); }},
      {"certify.mode", "dkw or clopper_pearson",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         try {
           c.certify.mode = cert::bound_mode_from_string(v);
         } catch (const std::exception&) {
           bad(k, "expected dkw or clopper_pearson");
         }
         c.radii.query.mode = c.certify.mode;
       }},

      {"attack.inner", "pgd or apgd",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v != "pgd" && v != "apgd") bad(k, "expected pgd or apgd");
         c.attack.attack.inner = attack::inner_attack_from_string(v);
       }},
      {"attack.step_size", "PGD step (> 0)",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.attack.attack.step_size = to_double(k, v);
         if (!(c.attack.attack.step_size > 0.0)) bad(k, "must be > 0");
       }},
      {"attack.beta", "inner iterations per unit of budget over step (> 0)",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.attack.attack.beta = to_double(k, v);
         if (!(c.attack.attack.beta > 0.0)) bad(k, "must be > 0");
       }},
      {"attack.q_filter", "minimum clean Q-gap for a target action (>= 0)",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.attack.attack.q_filter = to_double(k, v);
         if (c.attack.attack.q_filter < 0.0) bad(k, "must be >= 0");
       }},
      {"attack.episodes", "episodes per budget",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.attack.attack.episodes = static_cast<int>(at_least(k, to_int(k, v), 1));
       }},
      {"attack.tau_grid", "budgets, comma separated",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.attack.tau_grid = to_grid(k, v); }},
      {"attack.apgd_step_fraction", "APGD initial step as a fraction of tau",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.attack.attack.apgd_step_fraction = to_double(k, v);
         if (!(c.attack.attack.apgd_step_fraction > 0.0)) bad(k, "must be > 0");
       }},
      {"attack.apgd_momentum", "APGD momentum in [0, 1]",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.attack.attack.apgd_momentum = to_double(k, v);
         if (!(c.attack.attack.apgd_momentum >= 0.0 && c.attack.attack.apgd_momentum <= 1.0)) {
           bad(k, "must lie in [0, 1]");
         }
       }},
      {"attack.apgd_window", "APGD iterations without improvement before halving",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.attack.attack.apgd_window = static_cast<int>(at_least(k, to_int(k, v), 1));
       }},

      {"eval.episodes", "episodes for eval and qgap",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.eval_episodes = static_cast<int>(at_least(k, to_int(k, v), 1));
       }},

      {"radii.episodes", "smoothed episodes for radius estimates (>= 2)",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.radii.episodes = static_cast<std::size_t>(at_least(k, to_int(k, v), 2));
       }},
      {"radii.xi", "return threshold",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.radii.query.xi = to_double(k, v); }},
      {"radii.return_lower", "lower end of the return range",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.radii.query.return_lower = to_double(k, v);
       }},
      {"radii.return_upper", "upper end of the return range",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.radii.query.return_upper = to_double(k, v);
       }},
  };
  return table;
}

}  // namespace

void RunConfig::set_seed(std::uint64_t s) {
  train.seed = s;
  attack.attack.seed = s;
}

void RunConfig::set_threads(unsigned threads) {
  train.threads = threads;
}

RunConfig parse_config(const std::string& text) {
  // Collect first so that a preset can be applied before the overrides,
  // whatever order they appear in.
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, int> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (value.empty()) bad(key, "missing value");
    if (seen.contains(key)) bad(key, "given twice (lines " + std::to_string(seen[key]) + " and " + std::to_string(line_no) + ")");
    seen[key] = line_no;
    entries.emplace_back(key, value);
  }

  RunConfig cfg;
  for (const auto& [key, value] : entries) {
    if (key != "train.preset") continue;
    if (value == "desk") {
      cfg.train = train::TrainConfig::desk_preset();
    } else if (value == "full") {
      cfg.train = train::TrainConfig::full_preset();
    } else {
      bad(key, "expected desk or full");
    }
  }
  const auto& table = key_table();
  for (const auto& [key, value] : entries) {
    if (key == "train.preset") continue;
    const auto it = std::find_if(table.begin(), table.end(), [&](const KeySpec& s) { return key == s.key; });
    if (it == table.end()) bad(key, "unknown key");
    it->set(cfg, key, value);
  }
  cfg.set_seed(cfg.train.seed);

  const auto& q = cfg.radii.query;
  if (!(q.return_upper > q.return_lower)) bad("radii.return_upper", "must exceed radii.return_lower");
  if (cfg.train.epsilon.end > cfg.train.epsilon.start) bad("train.epsilon_end", "must not exceed train.epsilon_start");
  try {
    cfg.train.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::pair<std::string, std::string>> config_keys() {
  std::vector<std::pair<std::string, std::string>> out{{"train.preset", "desk or full, applied before other keys"}};
  for (const auto& s : key_table()) out.emplace_back(s.key, s.help);
  return out;
}

}  // namespace camp::cli
