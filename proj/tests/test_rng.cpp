#include <doctest.h>

#include <cmath>
#include <set>

#include "spe/rng.hpp"

using namespace spe;

TEST_CASE("derived seeds differ across indices and from the base") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(seen.count(42) == 0);
}

TEST_CASE("identical seeds give identical streams") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform01() == b.uniform01());
  Rng c(7), d(8);
  bool all_equal = true;
  for (int i = 0; i < 100; ++i) all_equal = all_equal && (c.uniform01() == d.uniform01());
  CHECK_FALSE(all_equal);
}

TEST_CASE("normal draws have the right first moments") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sumsq / n - 1.0) < 0.02);
}

TEST_CASE("gamma(2) draws have mean 2 and variance 2") {
  Rng rng(5);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = rng.gamma(2.0);
    REQUIRE(g >= 0.0);
    sum += g;
    sumsq += g * g;
  }
  double mean = sum / n;
  CHECK(std::abs(mean - 2.0) < 0.02);
  CHECK(std::abs(sumsq / n - mean * mean - 2.0) < 0.05);
}

TEST_CASE("sample_without_replacement yields distinct in-range indices") {
  Rng rng(9);
  auto idx = rng.sample_without_replacement(569, 50);
  std::set<int> s(idx.begin(), idx.end());
  CHECK(s.size() == 50);
  CHECK(*s.begin() >= 0);
  CHECK(*s.rbegin() < 569);
  CHECK_THROWS(rng.sample_without_replacement(5, 6));
}
