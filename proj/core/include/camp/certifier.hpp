#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "camp/cartpole.hpp"
#include "camp/network.hpp"

namespace camp::cert {

enum class BoundMode { kDkw, kClopperPearson };

std::string to_string(BoundMode mode);
BoundMode bound_mode_from_string(const std::string& name);

inline constexpr double kDefaultAlpha = 0.05;

// Undiscounted returns of m smoothed episodes, sorted ascending.
class ReturnSample {
 public:
  // `returns` in episode order; they are kept as given for audit output and
  // sorted for the bound computations.
  ReturnSample(std::vector<double> returns, double sigma, std::uint64_t seed);

  std::span<const double> returns() const { return sorted_; }
  std::span<const double> episode_returns() const { return returns_; }
  std::size_t m() const { return returns_.size(); }
  double sigma() const { return sigma_; }
  std::uint64_t seed() const { return seed_; }
  double mean() const;

 private:
  std::vector<double> returns_;
  std::vector<double> sorted_;
  double sigma_;
  std::uint64_t seed_;
};

// Play m episodes with N(0, sigma^2) observation noise; episode i uses the
// streams derived from (master_seed, i), so the result does not depend on
// `threads`.
ReturnSample collect_returns(const nn::QNetwork& net, const env::EnvConfig& env_cfg, double sigma,
                             std::size_t m, std::uint64_t master_seed, unsigned threads = 1);

// Lower confidence bound on Pr[return >= threshold] at one distinct return.
struct ThresholdBound {
  double threshold = 0.0;
  double p_lower = 0.0;
};

// One entry per distinct return, ascending. dkw: clamp(1 - ecdf - eps);
// clopper_pearson: per-threshold lower bound at alpha / K (Bonferroni over
// the K distinct thresholds).
std::vector<ThresholdBound> lower_confidence_probs(const ReturnSample& sample, double alpha, BoundMode mode);

// Lower bound on the expected return under any l2 perturbation sequence of
// total norm <= tau:
//   r_1 Phi(Phi^-1(P(r_1)) - tau/sigma) + sum_i (r_i - r_{i-1}) Phi(Phi^-1(P(r_i)) - tau/sigma)
double certified_expected_return(const ReturnSample& sample, double alpha, double sigma, double tau,
                                 BoundMode mode);

// Same bound from precomputed threshold probabilities.
double certified_expected_return(std::span<const ThresholdBound> bounds, double sigma, double tau);

// Largest tau keeping the first-term bound r_1 Phi(Phi^-1(P(r_1)) - tau/sigma)
// at or above xi: sigma [Phi^-1(P(r_1)) - Phi^-1(xi / r_1)]. Throws
// DomainError (naming the feasible ceiling r_1 P(r_1)) when xi is out of range.
double threshold_radius(double r1, double p_lower_r1, double sigma, double xi);
double threshold_radius(const ReturnSample& sample, double alpha, double sigma, double xi, BoundMode mode);

// Lipschitz radius from the smoothed expected return on returns in [a, b]:
//   sigma [Phi^-1((E - a)/(b - a)) - Phi^-1((xi - a)/(b - a))]
double soft_radius(double expected_return, double a, double b, double xi, double sigma);

// Per-step radius from the normalised top-1 and runner-up Q-values:
//   (sigma / 2) [Phi^-1((q1 - l)/(u - l)) - Phi^-1((q2 - l)/(u - l))]
double local_radius(double q_top1, double q_top2, double l, double u, double sigma);

// Integral of the difference of empirical CDFs, which equals
// mean(y) - mean(x) for nonnegative samples.
double cdf_expectation_gap(std::span<const double> x, std::span<const double> y);

struct CurvePoint {
  double tau = 0.0;
  double bound = 0.0;
};

struct CertCurve {
  std::vector<CurvePoint> points;
  double alpha = kDefaultAlpha;
  double sigma = 0.0;
  BoundMode mode = BoundMode::kDkw;
  std::size_t episodes = 0;
};

CertCurve certify_curve(const ReturnSample& sample, double alpha, double sigma, std::span<const double> tau_grid,
                        BoundMode mode);

// tau at which the bound falls to `level` (bisection); 0 when the bound at
// tau = 0 is already below it.
double crossing_radius(const ReturnSample& sample, double alpha, double sigma, BoundMode mode, double level);

// tau,certified_return,method,sigma,alpha,episodes,mode
std::string curve_csv(const CertCurve& curve, const std::string& method);

// episode,return
std::string returns_csv(std::span<const double> returns_in_episode_order);

struct StepRadius {
  std::size_t episode = 0;
  int step = 0;
  double q_top1 = 0.0;
  double q_top2 = 0.0;
  double radius = 0.0;
};

struct RadiusReport {
  // Empty when xi is outside the feasible range of the formula.
  std::optional<double> threshold_radius;
  std::optional<double> soft_radius;
  double expected_return = 0.0;
  double q_lower = 0.0;  // l, min Q over the evaluated steps
  double q_upper = 0.0;  // u, max Q over the evaluated steps
  std::vector<StepRadius> local;
};

struct RadiusQuery {
  double xi = 100.0;
  double return_lower = 0.0;    // A
  double return_upper = 200.0;  // B
  double alpha = kDefaultAlpha;
  BoundMode mode = BoundMode::kDkw;
};

// Collects `episodes` smoothed rollouts and reports the three radii. Local
// radii use l/u = min/max Q-value over every evaluated step.
RadiusReport compute_radii(const nn::QNetwork& net, const env::EnvConfig& env_cfg, double sigma,
                           std::size_t episodes, std::uint64_t seed, const RadiusQuery& query,
                           unsigned threads = 1);

}  // namespace camp::cert
