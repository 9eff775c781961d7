#include <catch2/catch_amalgamated.hpp>

#include "polypin/rng.hpp"

using namespace polypin;

TEST_CASE("splitmix64 streams are reproducible and disjoint") {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a() == b());

  SplitMix64 s0 = substream(42, 0);
  SplitMix64 s1 = substream(42, 1);
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    if (s0() == s1()) ++equal;
  }
  REQUIRE(equal == 0);
}

TEST_CASE("uniform01 lies in [0,1) with sane mean") {
  SplitMix64 g(7);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(g);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  REQUIRE_THAT(sum / 100000, Catch::Matchers::WithinAbs(0.5, 0.01));
}

TEST_CASE("standard normal has unit variance") {
  SplitMix64 g(11);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(g);
    sum += z;
    sum_sq += z * z;
  }
  REQUIRE_THAT(sum / n, Catch::Matchers::WithinAbs(0.0, 0.01));
  REQUIRE_THAT(sum_sq / n, Catch::Matchers::WithinAbs(1.0, 0.02));
}

TEST_CASE("sample_index follows the weights") {
  SplitMix64 g(3);
  const std::vector<double> w = {1.0, 3.0, 0.0, 6.0};
  std::vector<int> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_index(g, w)];
  REQUIRE(counts[2] == 0);
  REQUIRE_THAT(counts[0] / double(n), Catch::Matchers::WithinAbs(0.1, 0.01));
  REQUIRE_THAT(counts[1] / double(n), Catch::Matchers::WithinAbs(0.3, 0.01));
  REQUIRE_THAT(counts[3] / double(n), Catch::Matchers::WithinAbs(0.6, 0.01));
}
