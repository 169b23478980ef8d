#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "varseq/rng.hpp"

using namespace varseq;

TEST_CASE("identical (seed, stream) reproduces the sequence bit for bit") {
  CounterRng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  CounterRng c(42, 7), d(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("different streams and seeds decorrelate") {
  CounterRng a(42, 7), b(42, 8), c(43, 7);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t x = a.next_u64();
    if (x == b.next_u64()) ++equal_ab;
    if (x == c.next_u64()) ++equal_ac;
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("uniform lies strictly inside (0,1) and looks flat") {
  CounterRng r(1, 1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // mean 1/2, sd of the mean = 1/sqrt(12 n)
  CHECK(std::fabs(sum / n - 0.5) < 4.0 / std::sqrt(12.0 * n));
}

TEST_CASE("normal moments") {
  CounterRng r(9, 3);
  const int n = 200000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    ss += x * x;
  }
  const double mean = s / n;
  const double var = ss / n - mean * mean;
  CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("gamma sampler matches mean and variance") {
  for (double shape : {0.7, 1.0, 3.5}) {
    CounterRng r(11, 5);
    const int n = 100000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = r.gamma(shape);
      s += x;
      ss += x * x;
    }
    const double mean = s / n;
    const double var = ss / n - mean * mean;
    CHECK(std::fabs(mean - shape) < 5.0 * std::sqrt(shape / n));
    CHECK(std::fabs(var - shape) < 0.05 * shape + 5.0 * std::sqrt(shape) / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("cauchy and laplace quantiles") {
  CounterRng r(17, 2);
  const int n = 100000;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = r.cauchy(2.0);
  std::sort(xs.begin(), xs.end());
  // quartiles of Cauchy(scale 2) are -2 and +2
  CHECK(std::fabs(xs[n / 4] + 2.0) < 0.1);
  CHECK(std::fabs(xs[3 * n / 4] - 2.0) < 0.1);

  CounterRng r2(17, 3);
  double s = 0.0, sa = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r2.laplace(1.5);
    s += x;
    sa += std::fabs(x);
  }
  CHECK(std::fabs(s / n) < 0.05);
  CHECK(std::fabs(sa / n - 1.5) < 0.05);
}

TEST_CASE("stream ids are unique across (n, replication, tag)") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t n : {10ull, 100ull, 1000ull}) {
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
      for (auto tag : {StreamTag::kYBlock, StreamTag::kZBlock, StreamTag::kMeans}) {
        const auto id = make_stream(n, rep, tag);
        CHECK(seen.insert(id).second);
      }
    }
  }
}
