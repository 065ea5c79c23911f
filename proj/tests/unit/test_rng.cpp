#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "camp/rng.hpp"

using namespace camp;

TEST_CASE("stream seeds are stable and purpose-separated") {
  CHECK(stream_seed(1, "episode_noise", 3) == stream_seed(1, "episode_noise", 3));
  CHECK(stream_seed(1, "episode_noise", 3) != stream_seed(1, "episode_noise", 4));
  CHECK(stream_seed(1, "episode_noise", 3) != stream_seed(1, "episode_reset", 3));
  CHECK(stream_seed(1, "episode_noise", 3) != stream_seed(2, "episode_noise", 3));

  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(stream_seed(0, "x", i));
  CHECK(seen.size() == 10000);
}

TEST_CASE("make_stream replays the same sequence") {
  Engine a = make_stream(42, "replay");
  Engine b = make_stream(42, "replay");
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("uniform_index stays in range and is roughly flat") {
  Engine rng = make_stream(3, "index");
  const int n = 7;
  const int draws = 70000;
  std::vector<int> counts(n, 0);
  for (int i = 0; i < draws; ++i) {
    const auto k = uniform_index(rng, n);
    REQUIRE(k < static_cast<std::uint64_t>(n));
    ++counts[k];
  }
  // Chi-square with 6 degrees of freedom; 22.46 is the 0.999 quantile.
  double chi2 = 0.0;
  const double expected = static_cast<double>(draws) / n;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 22.46);
  CHECK(uniform_index(rng, 1) == 0);
}

TEST_CASE("uniform_unit lies in [0, 1)") {
  Engine rng = make_stream(4, "unit");
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform_unit(rng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("standard_normal moments") {
  Engine rng = make_stream(5, "normal");
  const int n = 200000;
  double s1 = 0.0;
  double s2 = 0.0;
  double s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  CHECK(std::abs(s1 / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.03));
}
