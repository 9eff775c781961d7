#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "polypin/environment.hpp"
#include "polypin/io.hpp"

using namespace polypin;

TEST_CASE("bernoulli generator: degenerate densities and concentration") {
  const auto zero = gen_bernoulli(100, Geometry::segment, 0.0, 1);
  REQUIRE(density(zero) == 0.0);
  const auto one = gen_bernoulli(100, Geometry::segment, 1.0, 1);
  REQUIRE(density(one) == 1.0);
  const auto half = gen_bernoulli(10000, Geometry::segment, 0.5, 123);
  REQUIRE(std::abs(density(half) - 0.5) < 0.02);
  REQUIRE_THROWS_AS(gen_bernoulli(10, Geometry::segment, 1.5, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(gen_bernoulli(10, Geometry::segment, -0.1, 1),
                    std::invalid_argument);
  // reproducible from the seed
  const auto again = gen_bernoulli(10000, Geometry::segment, 0.5, 123);
  REQUIRE(half.bits == again.bits);
}

TEST_CASE("periodic generator") {
  const auto all = gen_periodic(10, Geometry::segment, 1);
  REQUIRE(density(all) == 1.0);
  const auto gap2 = gen_periodic(10, Geometry::segment, 2);
  REQUIRE(contact_sites(gap2).t == std::vector<int>{2, 4, 6, 8, 10});
  const auto gap3 = gen_periodic(10, Geometry::segment, 3);
  REQUIRE_THAT(density(gap3), Catch::Matchers::WithinRel(0.3, 1e-12));
  const auto sq = gen_periodic(6, Geometry::square, 3);
  REQUIRE_THAT(density(sq), Catch::Matchers::WithinRel(4.0 / 36.0, 1e-12));
  REQUIRE_THROWS_AS(gen_periodic(10, Geometry::segment, 0),
                    std::invalid_argument);
}

TEST_CASE("block generator: thirds with separate densities") {
  const auto empty = gen_block(900, 0, 0, 0, 5);
  REQUIRE(density(empty) == 0.0);
  const auto full = gen_block(900, 1, 1, 1, 5);
  REQUIRE(density(full) == 1.0);
  const auto fig = gen_block(900, 0.8, 0.0, 0.8, 7);
  int first = 0, middle = 0, last = 0;
  for (int i = 1; i <= 900; ++i) {
    if (!fig.at(i)) continue;
    if (i <= 300) ++first;
    else if (i <= 600) ++middle;
    else ++last;
  }
  REQUIRE(middle == 0);
  REQUIRE(std::abs(first - 240) < 40);  // binomial(300, 0.8)
  REQUIRE(std::abs(last - 240) < 40);
  REQUIRE_THAT(density(fig), Catch::Matchers::WithinAbs(0.5333, 0.04));
}

TEST_CASE("vanishing family: sqrt prefix") {
  const auto env = gen_vanishing(100);
  REQUIRE(contact_sites(env).t.size() == 10);
  REQUIRE(contact_sites(env).t.back() == 10);
  const auto large = gen_vanishing(10000);
  REQUIRE_THAT(density(large), Catch::Matchers::WithinRel(1e-2, 1e-12));
  // doubling n twice halves the density
  REQUIRE_THAT(density(gen_vanishing(40000)),
               Catch::Matchers::WithinRel(density(large) / 2.0, 1e-12));
}

TEST_CASE("large fields remain representable") {
  const auto seg = gen_bernoulli(100000, Geometry::segment, 0.5, 1);
  REQUIRE(seg.bits.size() == 100000);
  const auto sq = gen_bernoulli(1000, Geometry::square, 0.5, 1);
  REQUIRE(sq.bits.size() == 1000000);
  REQUIRE(std::abs(density(sq) - 0.5) < 0.01);
}

TEST_CASE("contact sites invert the bit field") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto env =
        gen_bernoulli(200, Geometry::segment, uniform01(rng), rng());
    const auto sites = contact_sites(env);
    for (std::size_t i = 1; i < sites.t.size(); ++i) {
      REQUIRE(sites.t[i] > sites.t[i - 1]);
    }
    const auto rebuilt = environment_from_sites(env.n, sites.t);
    REQUIRE(rebuilt.bits == env.bits);
  }
  REQUIRE_THROWS_AS(environment_from_sites(5, {0}), std::invalid_argument);
  REQUIRE_THROWS_AS(environment_from_sites(5, {6}), std::invalid_argument);
}

TEST_CASE("cell analysis on uniform fields") {
  const auto ones = gen_bernoulli(16, Geometry::square, 1.0, 1);
  const auto all_good = analyze_cells(ones, 4, 0.9, 0.9);
  REQUIRE(all_good.good_cell_fraction == 1.0);
  REQUIRE(all_good.good_row_fraction == 1.0);

  const auto zeros = gen_bernoulli(16, Geometry::square, 0.0, 1);
  const auto none_good = analyze_cells(zeros, 4, 0.1, 0.1);
  REQUIRE(none_good.good_cell_fraction == 0.0);
  REQUIRE(none_good.good_row_fraction == 0.0);

  REQUIRE_THROWS_AS(analyze_cells(ones, 5, 0.1, 0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(
      analyze_cells(gen_bernoulli(8, Geometry::segment, 1.0, 1), 2, 0.1, 0.1),
      std::invalid_argument);
}

TEST_CASE("counting bound for good cells holds above the density threshold") {
  SplitMix64 rng(23);
  const double delta = 0.5, rho = 0.25;
  REQUIRE(counting_bound_applies(delta, rho));
  int checked = 0;
  while (checked < 200) {
    const int n = (checked % 2) ? 64 : 32;
    const int cell = (checked % 3) ? 8 : 4;
    const double p = delta + (1.0 - delta) * uniform01(rng);
    const auto env = gen_bernoulli(n, Geometry::square, p, rng());
    double ones = 0;
    for (auto b : env.bits) ones += b;
    if (ones <= delta * env.site_count()) continue;
    const auto cells = analyze_cells(env, cell, rho, 0.05);
    REQUIRE(cells.good_cell_fraction > rho / (1.0 + rho));
    ++checked;
  }
}

TEST_CASE("good-cell fraction example at density 0.5") {
  const auto env = gen_bernoulli(64, Geometry::square, 0.5, 99);
  double ones = 0;
  for (auto b : env.bits) ones += b;
  REQUIRE(ones > 0.5 * env.site_count() * 0.9);  // sanity
  const auto cells = analyze_cells(env, 8, 0.25, 0.25);
  REQUIRE(cells.good_cell_fraction >= 0.25 / 1.25);
}

TEST_CASE("environment json round trip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "polypin_env_test";
  fs::create_directories(dir);
  SplitMix64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const bool square = trial % 2;
    const auto env = gen_bernoulli(square ? 12 : 60,
                                   square ? Geometry::square : Geometry::segment,
                                   uniform01(rng), rng());
    const auto path = (dir / ("env" + std::to_string(trial) + ".json")).string();
    save_environment(env, path);
    const auto back = load_environment(path);
    REQUIRE(back.geometry == env.geometry);
    REQUIRE(back.n == env.n);
    REQUIRE(back.bits == env.bits);
    REQUIRE(back.seed == env.seed);
  }
  fs::remove_all(dir);
}

TEST_CASE("rle encoding starts with a zero run") {
  const std::vector<std::uint8_t> bits = {1, 1, 0, 0, 0, 1};
  const auto runs = rle_encode(bits);
  REQUIRE(runs == std::vector<std::int64_t>{0, 2, 3, 1});
  REQUIRE(rle_decode(runs, bits.size()) == bits);
  REQUIRE_THROWS(rle_decode(runs, 7));
}
