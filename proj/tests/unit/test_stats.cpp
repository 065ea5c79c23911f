#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "camp/errors.hpp"
#include "camp/rng.hpp"
#include "camp/stats.hpp"
#include "oracles.hpp"

using namespace camp;
using namespace camp::stats;

TEST_CASE("normal cdf agrees with the Taylor-series oracle") {
  for (double x = -7.0; x <= 7.0; x += 0.01) {
    const double want = oracle::normal_cdf_series(x);
    CHECK(std_normal_cdf(x) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("normal cdf reference values") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(std_normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-15));
  CHECK(std_normal_cdf(-3.0) == doctest::Approx(0.0013498980316300933).epsilon(1e-13));
  CHECK(std_normal_cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-6));
  CHECK(std_normal_cdf(-10.0) < 1e-20);
  CHECK(std_normal_cdf(-10.0) >= 0.0);
  CHECK(std_normal_cdf(100.0) == 1.0);
  CHECK(std_normal_cdf(-100.0) > 0.0);
  CHECK_THROWS_AS(std_normal_cdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
  CHECK_THROWS_AS(std_normal_cdf(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("normal pdf is the cdf derivative") {
  for (double x : {-2.5, -0.3, 0.0, 1.7}) {
    const double fd = oracle::central_difference(std_normal_cdf, x, 1e-5);
    CHECK(std_normal_pdf(x) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("quantile matches bisection on the cdf") {
  for (double p : {1e-300, 1e-12, 1e-6, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.97575, 0.999, 1.0 - 1e-12}) {
    // Upper tail solved through 1 - p, which is exact for p > 1/2.
    const double lower = p <= 0.5 ? p : 1.0 - p;
    const double root = oracle::bisect([lower](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)) - lower; }, -40.0, 0.0);
    const double want = p <= 0.5 ? root : -root;
    if (p >= 1e-12) {
      CHECK(std_normal_quantile(p) == doctest::Approx(want).epsilon(1e-9));
    }
    CHECK(std::isfinite(std_normal_quantile(p)));
  }
  CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(std_normal_quantile(0.9) == doctest::Approx(1.2815516).epsilon(1e-6));
  CHECK(std_normal_quantile(0.75) == doctest::Approx(0.6744898).epsilon(1e-6));
  CHECK(std_normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  CHECK(std_normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
}

TEST_CASE("quantile and cdf round-trip on a dense grid") {
  double worst = 0.0;
  for (int i = 1; i < 10000; ++i) {
    const double p = i / 10000.0;
    worst = std::max(worst, std::abs(std_normal_cdf(std_normal_quantile(p)) - p));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("quantile is odd about one half") {
  for (double p : {0x1p-27, 0.01, 0.2, 0.45}) {  // 1 - p is exact
    CHECK(std_normal_quantile(p) == doctest::Approx(-std_normal_quantile(1.0 - p)).epsilon(1e-12));
  }
}

TEST_CASE("quantile rejects the closed ends") {
  CHECK_THROWS_AS(std_normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(std_normal_quantile(1.0), DomainError);
  CHECK_THROWS_AS(std_normal_quantile(-0.1), DomainError);
  CHECK_THROWS_AS(std_normal_quantile(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST_CASE("dkw half-width") {
  CHECK(dkw_epsilon({0.05, 10000}) == doctest::Approx(0.013581015157406196).epsilon(1e-12));
  CHECK(dkw_epsilon({0.05, 100}) == doctest::Approx(0.1358110).epsilon(1e-6));
  CHECK(dkw_epsilon({0.05, 1}) == doctest::Approx(std::sqrt(std::log(40.0) / 2.0)).epsilon(1e-14));
  // Quadrupling m halves the width.
  CHECK(dkw_epsilon({0.1, 400}) == doctest::Approx(0.5 * dkw_epsilon({0.1, 100})).epsilon(1e-14));
  // ln(2 / alpha) vanishes as alpha approaches 2.
  CHECK(dkw_epsilon({2.0 - 1e-15, 10}) < 1e-7);
}

TEST_CASE("confidence parameters are validated") {
  CHECK_THROWS_AS(ConfidenceParams(0.0, 10), DomainError);
  CHECK_THROWS_AS(ConfidenceParams(2.0, 10), DomainError);
  CHECK_THROWS_AS(ConfidenceParams(0.05, 0), DomainError);
  CHECK_NOTHROW(ConfidenceParams(0.05, 1));
}

TEST_CASE("ecdf counts samples strictly below") {
  const std::vector<double> s{1.0, 2.0, 2.0, 3.0};
  CHECK(ecdf_at(s, 0.5) == 0.0);
  CHECK(ecdf_at(s, 1.0) == 0.0);
  CHECK(ecdf_at(s, 2.0) == 0.25);
  CHECK(ecdf_at(s, 2.5) == 0.75);
  CHECK(ecdf_at(s, 3.0) == 0.75);
  CHECK(ecdf_at(s, 3.5) == 1.0);
  CHECK_THROWS_AS(ecdf_at(std::vector<double>{}, 1.0), UsageError);
}

TEST_CASE("dkw band covers the true cdf at roughly the nominal rate") {
  // Uniform(0,1): F(c) = c. Coverage of the lower tail-probability bound.
  Engine rng = make_stream(7, "dkw_coverage");
  const int trials = 300;
  const int m = 200;
  const double eps = dkw_epsilon({0.05, m});
  int covered = 0;
  std::vector<double> s(m);
  for (int t = 0; t < trials; ++t) {
    for (auto& v : s) v = uniform_unit(rng);
    std::sort(s.begin(), s.end());
    double sup = 0.0;
    for (int i = 0; i < m; ++i) {
      sup = std::max({sup, std::abs((i + 1.0) / m - s[i]), std::abs(static_cast<double>(i) / m - s[i])});
    }
    covered += sup <= eps ? 1 : 0;
  }
  CHECK(covered >= static_cast<int>(0.92 * trials));
}

TEST_CASE("clopper-pearson lower bound solves the binomial tail equation") {
  struct Case {
    std::int64_t k, n;
    double alpha;
  };
  for (const Case c : {Case{7, 10, 0.05}, Case{1, 1000, 0.01}, Case{500, 1000, 0.05}, Case{95, 100, 0.05 / 3},
                       Case{9999, 10000, 0.05}, Case{3, 5, 0.5}}) {
    const double want = oracle::bisect(
        [&](double p) { return oracle::binomial_upper_tail(c.k, c.n, p) - c.alpha; }, 0.0, 1.0);
    CHECK(clopper_pearson_lower(c.k, c.n, c.alpha) == doctest::Approx(want).epsilon(1e-9));
  }
  CHECK(clopper_pearson_lower(7, 10, 0.05) == doctest::Approx(0.39337578389458766).epsilon(1e-12));
}

TEST_CASE("clopper-pearson edge counts") {
  CHECK(clopper_pearson_lower(0, 50, 0.05) == 0.0);
  CHECK(clopper_pearson_lower(50, 50, 0.05) == doctest::Approx(std::pow(0.05, 1.0 / 50.0)).epsilon(1e-14));
  CHECK_THROWS_AS(clopper_pearson_lower(-1, 50, 0.05), DomainError);
  CHECK_THROWS_AS(clopper_pearson_lower(51, 50, 0.05), DomainError);
  CHECK_THROWS_AS(clopper_pearson_lower(1, 0, 0.05), DomainError);
  CHECK_THROWS_AS(clopper_pearson_lower(1, 5, 1.0), DomainError);
}

TEST_CASE("clopper-pearson is monotone in successes and confidence") {
  double prev = -1.0;
  for (int k = 0; k <= 40; ++k) {
    const double p = clopper_pearson_lower(k, 40, 0.05);
    CHECK(p > prev);
    prev = p;
  }
  CHECK(clopper_pearson_lower(30, 40, 0.01) < clopper_pearson_lower(30, 40, 0.1));
  for (int n : {1, 7, 100}) {
    for (int k = 0; k <= n; ++k) CHECK(clopper_pearson_lower(k, n, 0.05) <= static_cast<double>(k) / n);
  }
}
