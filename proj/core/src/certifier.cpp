#include "camp/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "camp/errors.hpp"
#include "camp/parallel.hpp"
#include "camp/rollout.hpp"
#include "camp/stats.hpp"

namespace camp::cert {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kProbCeil = 1.0 - 1e-12;

double clamp_prob(double p) {
  return std::clamp(p, kProbFloor, kProbCeil);
}

double phi_inv(double p) {
  return stats::std_normal_quantile(clamp_prob(p));
}

// Phi(Phi^-1(p) - shift) with P = 0 contributing nothing.
double shifted_prob(double p, double shift) {
  if (p <= 0.0) return 0.0;
  return stats::std_normal_cdf(phi_inv(p) - shift);
}

double tau_over_sigma(double sigma, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw DomainError("certification budget tau must be finite and >= 0");
  }
  if (!(sigma >= 0.0)) {
    throw DomainError("sigma must be >= 0");
  }
  if (tau == 0.0) return 0.0;
  if (sigma == 0.0) {
    throw DomainError("tau > 0 cannot be certified with sigma = 0");
  }
  return tau / sigma;
}

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string to_string(BoundMode mode) {
  return mode == BoundMode::kDkw ? "dkw" : "clopper_pearson";
}

BoundMode bound_mode_from_string(const std::string& name) {
  if (name == "dkw") return BoundMode::kDkw;
  if (name == "clopper_pearson" || name == "cp") return BoundMode::kClopperPearson;
  throw ConfigError("unknown bound mode '" + name + "' (expected dkw or clopper_pearson)");
}

ReturnSample::ReturnSample(std::vector<double> returns, double sigma, std::uint64_t seed)
    : returns_(std::move(returns)), sigma_(sigma), seed_(seed) {
  if (returns_.size() < 2) {
    throw UsageError("a return sample needs at least two episodes");
  }
  for (double r : returns_) {
    if (!std::isfinite(r)) throw DomainError("return sample contains a non-finite value");
  }
  sorted_ = returns_;
  std::sort(sorted_.begin(), sorted_.end());
}

double ReturnSample::mean() const {
  return std::accumulate(sorted_.begin(), sorted_.end(), 0.0) / static_cast<double>(sorted_.size());
}

ReturnSample collect_returns(const nn::QNetwork& net, const env::EnvConfig& env_cfg, double sigma,
                             std::size_t m, std::uint64_t master_seed, unsigned threads) {
  if (m < 2) {
    throw UsageError("collect_returns needs m >= 2");
  }
  std::vector<double> returns(m);
  parallel_for(m, threads, [&](std::size_t i) {
    returns[i] = env::greedy_episode(net, env_cfg, sigma, master_seed, i);
  });
  return ReturnSample(std::move(returns), sigma, master_seed);
}

std::vector<ThresholdBound> lower_confidence_probs(const ReturnSample& sample, double alpha, BoundMode mode) {
  const auto r = sample.returns();
  const auto m = static_cast<std::int64_t>(r.size());
  std::vector<std::size_t> firsts;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i == 0 || r[i] != r[i - 1]) firsts.push_back(i);
  }
  std::vector<ThresholdBound> out;
  out.reserve(firsts.size());
  if (mode == BoundMode::kDkw) {
    const double eps = stats::dkw_epsilon(stats::ConfidenceParams(alpha, m));
    for (std::size_t i : firsts) {
      const double ecdf = static_cast<double>(i) / static_cast<double>(m);
      out.push_back({r[i], std::clamp(1.0 - ecdf - eps, 0.0, 1.0)});
    }
  } else {
    const double per_threshold = alpha / static_cast<double>(firsts.size());
    for (std::size_t i : firsts) {
      const auto at_least = m - static_cast<std::int64_t>(i);
      out.push_back({r[i], stats::clopper_pearson_lower(at_least, m, per_threshold)});
    }
  }
  return out;
}

double certified_expected_return(std::span<const ThresholdBound> bounds, double sigma, double tau) {
  const double shift = tau_over_sigma(sigma, tau);
  double total = 0.0;
  double previous = 0.0;
  for (const auto& b : bounds) {
    total += (b.threshold - previous) * shifted_prob(b.p_lower, shift);
    previous = b.threshold;
  }
  return std::max(0.0, total);
}

double certified_expected_return(const ReturnSample& sample, double alpha, double sigma, double tau,
                                 BoundMode mode) {
  const auto bounds = lower_confidence_probs(sample, alpha, mode);
  return certified_expected_return(bounds, sigma, tau);
}

double threshold_radius(double r1, double p_lower_r1, double sigma, double xi) {
  if (!(r1 > 0.0)) {
    throw DomainError("threshold_radius needs the smallest return r1 > 0");
  }
  if (!(sigma >= 0.0)) {
    throw DomainError("sigma must be >= 0");
  }
  const double ceiling = r1 * p_lower_r1;
  if (!(xi > 0.0 && xi <= ceiling)) {
    throw DomainError("target xi=" + fmt9(xi) + " outside the feasible range (0, " + fmt9(ceiling) + "]");
  }
  if (p_lower_r1 <= 0.0) {
    throw DomainError("lower bound P(r1) is zero; no radius can be certified");
  }
  const double ratio = std::min(xi / r1, p_lower_r1);
  return std::max(0.0, sigma * (phi_inv(p_lower_r1) - phi_inv(ratio)));
}

double threshold_radius(const ReturnSample& sample, double alpha, double sigma, double xi, BoundMode mode) {
  const auto bounds = lower_confidence_probs(sample, alpha, mode);
  return threshold_radius(bounds.front().threshold, bounds.front().p_lower, sigma, xi);
}

double soft_radius(double expected_return, double a, double b, double xi, double sigma) {
  if (!(a < b)) {
    throw DomainError("soft_radius needs A < B");
  }
  if (!(a <= xi && xi <= expected_return && expected_return <= b)) {
    throw DomainError("soft_radius needs A <= xi <= E <= B");
  }
  const double span = b - a;
  return std::max(0.0, sigma * (phi_inv((expected_return - a) / span) - phi_inv((xi - a) / span)));
}

double local_radius(double q_top1, double q_top2, double l, double u, double sigma) {
  if (!(l < u)) {
    throw DomainError("local_radius needs l < u");
  }
  if (!(l <= q_top2 && q_top2 <= q_top1 && q_top1 <= u)) {
    throw DomainError("local_radius needs l <= q_top2 <= q_top1 <= u");
  }
  const double span = u - l;
  return std::max(0.0, 0.5 * sigma * (phi_inv((q_top1 - l) / span) - phi_inv((q_top2 - l) / span)));
}

double cdf_expectation_gap(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) {
    throw UsageError("cdf_expectation_gap needs two nonempty samples");
  }
  auto check = [](std::span<const double> s) {
    for (double v : s) {
      if (!std::isfinite(v) || v < 0.0) throw DomainError("cdf_expectation_gap expects finite samples >= 0");
    }
  };
  check(x);
  check(y);
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  std::vector<double> knots{0.0};
  std::merge(xs.begin(), xs.end(), ys.begin(), ys.end(), std::back_inserter(knots));
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  // Both ECDFs are constant on [knots[k], knots[k+1]). Accumulating the
  // numerator over the common denominator nx * ny keeps integer inputs exact.
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  double numerator = 0.0;
  std::size_t cx = 0;
  std::size_t cy = 0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    while (cx < xs.size() && xs[cx] <= knots[k]) ++cx;
    while (cy < ys.size() && ys[cy] <= knots[k]) ++cy;
    const double width = knots[k + 1] - knots[k];
    numerator += width * (static_cast<double>(cx) * ny - static_cast<double>(cy) * nx);
  }
  return numerator / (nx * ny);
}

CertCurve certify_curve(const ReturnSample& sample, double alpha, double sigma, std::span<const double> tau_grid,
                        BoundMode mode) {
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end()) || (!tau_grid.empty() && tau_grid.front() < 0.0)) {
    throw DomainError("tau grid must be sorted ascending and nonnegative");
  }
  const auto bounds = lower_confidence_probs(sample, alpha, mode);
  CertCurve curve;
  curve.alpha = alpha;
  curve.sigma = sigma;
  curve.mode = mode;
  curve.episodes = sample.m();
  for (double tau : tau_grid) {
    curve.points.push_back({tau, certified_expected_return(bounds, sigma, tau)});
  }
  return curve;
}

double crossing_radius(const ReturnSample& sample, double alpha, double sigma, BoundMode mode, double level) {
  const auto bounds = lower_confidence_probs(sample, alpha, mode);
  auto bound_at = [&](double tau) { return certified_expected_return(bounds, sigma, tau); };
  if (bound_at(0.0) < level || sigma == 0.0) return 0.0;
  double lo = 0.0;
  double hi = sigma;
  while (bound_at(hi) >= level && hi < 1e6 * sigma) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (bound_at(mid) >= level ? lo : hi) = mid;
  }
  return lo;
}

std::string curve_csv(const CertCurve& curve, const std::string& method) {
  std::ostringstream os;
  os << "tau,certified_return,method,sigma,alpha,episodes,mode\n";
  for (const auto& p : curve.points) {
    os << fmt9(p.tau) << ',' << fmt9(p.bound) << ',' << method << ',' << fmt9(curve.sigma) << ','
       << fmt9(curve.alpha) << ',' << curve.episodes << ',' << to_string(curve.mode) << '\n';
  }
  return os.str();
}

std::string returns_csv(std::span<const double> returns_in_episode_order) {
  std::ostringstream os;
  os << "episode,return\n";
  for (std::size_t i = 0; i < returns_in_episode_order.size(); ++i) {
    os << i << ',' << fmt9(returns_in_episode_order[i]) << '\n';
  }
  return os.str();
}

RadiusReport compute_radii(const nn::QNetwork& net, const env::EnvConfig& env_cfg, double sigma,
                           std::size_t episodes, std::uint64_t seed, const RadiusQuery& query, unsigned threads) {
  if (episodes < 2) {
    throw UsageError("compute_radii needs at least two episodes");
  }
  std::vector<double> returns(episodes);
  std::vector<std::vector<StepRadius>> steps(episodes);
  std::vector<double> q_min(episodes, std::numeric_limits<double>::infinity());
  std::vector<double> q_max(episodes, -std::numeric_limits<double>::infinity());
  parallel_for(episodes, threads, [&](std::size_t i) {
    returns[i] = env::greedy_episode(net, env_cfg, sigma, seed, i, [&](const env::StepView& v) {
      const auto& q = *v.q_values;
      const double top = q.maxCoeff();
      StepRadius s;
      s.episode = i;
      s.step = v.step;
      s.q_top1 = top;
      s.q_top2 = top - nn::q_gap(q);
      steps[i].push_back(s);
      q_min[i] = std::min(q_min[i], q.minCoeff());
      q_max[i] = std::max(q_max[i], top);
    });
  });

  RadiusReport report;
  const ReturnSample sample(returns, sigma, seed);
  report.expected_return = sample.mean();
  try {
    report.threshold_radius = threshold_radius(sample, query.alpha, sigma, query.xi, query.mode);
  } catch (const DomainError&) {
  }
  try {
    report.soft_radius =
        soft_radius(report.expected_return, query.return_lower, query.return_upper, query.xi, sigma);
  } catch (const DomainError&) {
  }
  report.q_lower = *std::min_element(q_min.begin(), q_min.end());
  report.q_upper = *std::max_element(q_max.begin(), q_max.end());
  for (auto& episode_steps : steps) {
    for (auto& s : episode_steps) {
      s.radius = report.q_upper > report.q_lower
                     ? local_radius(s.q_top1, s.q_top2, report.q_lower, report.q_upper, sigma)
                     : 0.0;
      report.local.push_back(s);
    }
  }
  return report;
}

}  // namespace camp::cert
