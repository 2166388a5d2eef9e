#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "odlab/noise.hpp"
#include "odlab/stats.hpp"

using namespace odlab;

TEST_CASE("counter rng is a pure function of its inputs") {
  CounterRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  CHECK(a.raw(5, 1) == b.raw(5, 1));
  CHECK(a.raw(5, 1) != c.raw(5, 1));
  CHECK(a.raw(5, 1) != d.raw(5, 1));
  CHECK(a.normal(11, 3) == b.normal(11, 3));
  CHECK(a.uniform(0, 0) >= 0.0);
  CHECK(a.uniform(0, 0) < 1.0);
  CHECK(a.derive(1) != a.derive(2));
}

TEST_CASE("normal draws have the right moments") {
  CounterRng rng(123, 0);
  const int n = 200000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(i, 0);
    s1 += z;
    s2 += z * z;
    s3 += z * z * z;
    s4 += z * z * z * z;
  }
  s1 /= n;
  s2 /= n;
  s3 /= n;
  s4 /= n;
  const double se = 1.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(s1) < 4 * se);
  CHECK(std::abs(s2 - 1.0) < 4 * std::sqrt(2.0) * se);
  CHECK(std::abs(s3) < 4 * std::sqrt(15.0) * se);
  CHECK(std::abs(s4 - 3.0) < 4 * std::sqrt(96.0) * se);
}

TEST_CASE("draws are serially and cross-slot uncorrelated") {
  CounterRng rng(9, 1);
  const int n = 50000;
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = rng.normal(i, 0);
    b[i] = rng.normal(i, 1);
  }
  CHECK(std::abs(pearson_corr(a, b)) < 4.0 / std::sqrt(double(n)));
  std::vector<double> lag(a.begin() + 1, a.end());
  a.pop_back();
  CHECK(std::abs(pearson_corr(a, lag)) < 4.0 / std::sqrt(double(n)));
}

TEST_CASE("noise path increments are N(0, h) and reproducible") {
  const double h = 0.01;
  NoisePath path(77, 3, 2, h);
  std::vector<double> xs;
  double buf[2];
  for (int k = 0; k < 40000; ++k) {
    path.increment(k, buf);
    xs.push_back(buf[0]);
  }
  const double m = mean(xs);
  const double v = variance(xs);
  CHECK(std::abs(m) < 4 * std::sqrt(h / xs.size()));
  CHECK(std::abs(v - h) < 4 * h * std::sqrt(2.0 / xs.size()));

  NoisePath again(77, 3, 2, h);
  double buf2[2];
  again.increment(123, buf2);
  path.increment(123, buf);
  CHECK(buf[0] == buf2[0]);
  CHECK(buf[1] == buf2[1]);
}

TEST_CASE("bin sums equal the literal sum of their increments") {
  NoisePath path(5, 0, 3, 0.25);
  const std::uint64_t spb = 16;
  BinnedNoiseSums bins;
  bins.dim = 3;
  bins.steps_per_bin = spb;
  bins.sums.assign(4 * 3, 0.0);
  std::vector<double> manual(4 * 3, 0.0);
  double buf[3];
  for (std::uint64_t k = 0; k < 64; ++k) {
    path.increment(k, buf);
    for (int i = 0; i < 3; ++i) {
      bins.bin(k / spb)[i] += buf[i];
      manual[(k / spb) * 3 + i] += buf[i];
    }
  }
  for (std::size_t i = 0; i < manual.size(); ++i) {
    CHECK(bins.sums[i] == manual[i]);
  }
  CHECK(bins.bins() == 4);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(NoisePath(1, 0, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(NoisePath(1, 0, 1, 0.0), std::invalid_argument);
}
