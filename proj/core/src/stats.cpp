#include "camp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "camp/errors.hpp"

namespace camp::stats {

namespace {

constexpr double kCdfClamp = 38.0;

// Acklam's rational approximation for the lower region p <= 0.5,
// relative error about 1e-9 before refinement.
double acklam_lower(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

ConfidenceParams::ConfidenceParams(double alpha, std::int64_t m) : alpha_(alpha), m_(m) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw DomainError("confidence alpha must lie in (0, 2), got " + std::to_string(alpha));
  }
  if (m < 1) {
    throw DomainError("sample count m must be positive, got " + std::to_string(m));
  }
}

double std_normal_cdf(double x) {
  if (!std::isfinite(x)) {
    throw DomainError("std_normal_cdf: non-finite argument");
  }
  x = std::clamp(x, -kCdfClamp, kCdfClamp);
  return std::max(0.0, 0.5 * std::erfc(-x / std::numbers::sqrt2));
}

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_normal_quantile: p must lie in (0, 1), got " + std::to_string(p));
  }
  // Work in the lower half so the Newton residual Phi(x) - q is computed
  // without cancellation; 1 - p is exact for p >= 0.5.
  const bool upper = p > 0.5;
  const double q = upper ? 1.0 - p : p;
  double x = acklam_lower(q);
  for (int i = 0; i < 2; ++i) {
    const double residual = 0.5 * std::erfc(-x / std::numbers::sqrt2) - q;
    x -= residual / std_normal_pdf(x);
  }
  return upper ? -x : x;
}

double dkw_epsilon(const ConfidenceParams& params) {
  return std::sqrt(std::log(2.0 / params.alpha()) / (2.0 * static_cast<double>(params.m())));
}

double ecdf_at(std::span<const double> samples, double c) {
  if (samples.empty()) {
    throw UsageError("ecdf_at: empty sample");
  }
  const auto below = std::lower_bound(samples.begin(), samples.end(), c) - samples.begin();
  return static_cast<double>(below) / static_cast<double>(samples.size());
}

double clopper_pearson_lower(std::int64_t successes, std::int64_t trials, double alpha) {
  if (trials < 1 || successes < 0 || successes > trials) {
    throw DomainError("clopper_pearson_lower: need 0 <= successes <= trials and trials >= 1");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("clopper_pearson_lower: alpha must lie in (0, 1)");
  }
  if (successes == 0) {
    return 0.0;
  }
  if (successes == trials) {
    return std::pow(alpha, 1.0 / static_cast<double>(trials));
  }
  // Lower endpoint is the alpha quantile of Beta(k, n - k + 1).
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  return boost::math::ibeta_inv(k, n - k + 1.0, alpha);
}

}  // namespace camp::stats
