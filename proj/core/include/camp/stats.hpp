#pragma once

#include <cstdint>
#include <span>

namespace camp::stats {

// Failure probability and sample count for a confidence statement.
// alpha is accepted on (0, 2): the DKW half-width formula degenerates to
// zero at alpha = 2, which is a useful limit for testing.
class ConfidenceParams {
 public:
  ConfidenceParams(double alpha, std::int64_t m);

  double alpha() const { return alpha_; }
  std::int64_t m() const { return m_; }

 private:
  double alpha_;
  std::int64_t m_;
};

/// Standard normal CDF. Arguments are clamped to [-38, 38] so the result
/// saturates instead of underflowing. Throws DomainError on NaN/inf.
double std_normal_cdf(double x);

/// Standard normal density.
double std_normal_pdf(double x);

/// Inverse of std_normal_cdf on the open interval (0, 1). Callers clamp
/// explicitly; p <= 0 or p >= 1 throws DomainError.
double std_normal_quantile(double p);

/// Dvoretzky-Kiefer-Wolfowitz band half-width sqrt(ln(2/alpha) / (2m)).
double dkw_epsilon(const ConfidenceParams& params);

/// Fraction of samples strictly below c. samples must be sorted ascending.
double ecdf_at(std::span<const double> samples, double c);

/// One-sided (1 - alpha) Clopper-Pearson lower bound on a binomial
/// proportion given `successes` out of `trials`.
double clopper_pearson_lower(std::int64_t successes, std::int64_t trials, double alpha);

}  // namespace camp::stats
