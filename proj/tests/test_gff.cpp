#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "polypin/gff.hpp"

using namespace polypin;

namespace {

Environment full_square(int n) {
  return gen_bernoulli(n, Geometry::square, 1.0, 1);
}

// Numerical-integration oracle for the 2x2 lattice: partition functions of
// the field with some sites pinned to zero, via tensor Simpson quadrature
// of exp(-H) with H summed edge by edge (no determinants involved).
double simpson_z_2x2(const std::array<bool, 4>& pinned) {
  // site order (x,y): 0:(1,1) 1:(2,1) 2:(1,2) 3:(2,2)
  static constexpr int interior_edges[4][2] = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  const double lo = -6.0, hi = 6.0;
  const int nodes = 61;  // odd, Simpson-ready
  const double h = (hi - lo) / (nodes - 1);
  std::vector<int> free_sites;
  for (int s = 0; s < 4; ++s) {
    if (!pinned[s]) free_sites.push_back(s);
  }
  const int k = static_cast<int>(free_sites.size());
  if (k == 0) return 1.0;
  auto weight = [&](int i) {
    if (i == 0 || i == nodes - 1) return 1.0;
    return (i % 2 == 1) ? 4.0 : 2.0;
  };
  std::array<double, 4> x{0.0, 0.0, 0.0, 0.0};
  double total = 0.0;
  std::vector<int> idx(k, 0);
  while (true) {
    double wgt = 1.0;
    for (int d = 0; d < k; ++d) {
      x[free_sites[d]] = lo + h * idx[d];
      wgt *= weight(idx[d]);
    }
    double energy = 0.0;
    for (const auto& e : interior_edges) {
      const double diff = x[e[0]] - x[e[1]];
      energy += 0.5 * diff * diff;
    }
    for (int s = 0; s < 4; ++s) energy += 0.5 * 2.0 * x[s] * x[s];  // 2 boundary edges each
    total += wgt * std::exp(-energy);
    int d = 0;
    while (d < k && ++idx[d] == nodes) {
      idx[d] = 0;
      ++d;
    }
    if (d == k) break;
  }
  return total * std::pow(h / 3.0, k);
}

}  // namespace

TEST_CASE("single-site closed forms") {
  const double root = std::sqrt(2.0 / std::numbers::pi);
  GffInstance inst{full_square(1), 2.0};
  const auto ex = exact_expansion_small(inst);
  REQUIRE_THAT(std::exp(ex.log_ratio),
               Catch::Matchers::WithinRel(1.0 + 2.0 * root, 1e-12));
  REQUIRE_THAT(ex.expected_pinned,
               Catch::Matchers::WithinRel(2.0 * root / (1.0 + 2.0 * root),
                                          1e-12));
  const auto rb = ratio_bound_check(1, 1, 1);
  REQUIRE_THAT(rb.ratio, Catch::Matchers::WithinRel(root, 1e-12));
  REQUIRE(rb.distance == 1);
}

TEST_CASE("eta = 0: expansion collapses to the empty set") {
  GffInstance inst{full_square(2), 0.0};
  const auto ex = exact_expansion_small(inst);
  REQUIRE(ex.log_ratio == 0.0);
  REQUIRE(ex.expected_pinned == 0.0);
  REQUIRE(ex.size_law[0] == 1.0);
}

TEST_CASE("expansion weights: empty set is 1, all positive") {
  GffInstance inst{full_square(3), 1.3};
  const auto ex = exact_expansion_small(inst);
  REQUIRE(ex.subset_probs[0] > 0.0);
  double total = 0.0;
  for (double p : ex.subset_probs) {
    REQUIRE(p > 0.0);
    total += p;
  }
  REQUIRE_THAT(total, Catch::Matchers::WithinRel(1.0, 1e-12));
}

TEST_CASE("2x2 expansion matches the quadrature oracle") {
  const double eta = 1.7;
  GffInstance inst{full_square(2), eta};
  const auto ex = exact_expansion_small(inst);
  const double z_full = simpson_z_2x2({false, false, false, false});
  double z_eta = 0.0, weighted = 0.0;
  for (std::uint32_t mask = 0; mask < 16; ++mask) {
    std::array<bool, 4> pinned{};
    int size = 0;
    for (int s = 0; s < 4; ++s) {
      pinned[s] = mask & (1u << s);
      size += pinned[s];
    }
    const double term = std::pow(eta, size) * simpson_z_2x2(pinned) / z_full;
    z_eta += term;
    weighted += size * term;
  }
  REQUIRE_THAT(std::exp(ex.log_ratio),
               Catch::Matchers::WithinRel(z_eta, 1e-6));
  REQUIRE_THAT(ex.expected_pinned,
               Catch::Matchers::WithinRel(weighted / z_eta, 1e-6));
}

TEST_CASE("gibbs sweep preserves the pinning constraints") {
  const auto env = gen_bernoulli(6, Geometry::square, 0.5, 3);
  GffInstance inst{env, 1.5};
  GffState st = make_initial_state(inst);
  SplitMix64 rng(61);
  for (int s = 0; s < 200; ++s) {
    gibbs_sweep(inst, st, rng);
    for (std::size_t i = 0; i < st.pinned.size(); ++i) {
      if (st.pinned[i]) {
        REQUIRE(st.heights[i] == 0.0);
        REQUIRE(env.bits[i] == 1);
      }
    }
  }
}

TEST_CASE("eta = 0 sampler is the plain heat bath") {
  GffInstance inst{full_square(4), 0.0};
  GffState st = make_initial_state(inst);
  SplitMix64 rng(62);
  for (int s = 0; s < 100; ++s) {
    gibbs_sweep(inst, st, rng);
    for (auto p : st.pinned) REQUIRE(p == 0);
  }
}

TEST_CASE("isolated site: pin probability and conditional law") {
  const double eta = 2.0;
  const double root = std::sqrt(2.0 / std::numbers::pi);
  GffInstance inst{full_square(1), eta};
  GffState st = make_initial_state(inst);
  SplitMix64 rng(63);
  const int sweeps = 200000;
  int pinned = 0;
  double sum = 0.0, sum_sq = 0.0;
  int free_count = 0;
  for (int s = 0; s < sweeps; ++s) {
    gibbs_sweep(inst, st, rng);
    if (st.pinned[0]) {
      ++pinned;
    } else {
      ++free_count;
      sum += st.heights[0];
      sum_sq += st.heights[0] * st.heights[0];
    }
  }
  const double p_exact = eta * root / (1.0 + eta * root);
  const double se = std::sqrt(p_exact * (1 - p_exact) / sweeps);
  REQUIRE(std::abs(pinned / double(sweeps) - p_exact) <= 4 * se);
  // conditional (unpinned) law is N(0, 1/4) at this site
  REQUIRE_THAT(sum / free_count, Catch::Matchers::WithinAbs(0.0, 0.01));
  REQUIRE_THAT(sum_sq / free_count, Catch::Matchers::WithinAbs(0.25, 0.01));
}

TEST_CASE("stationary pinned-set law matches the exact expansion") {
  GffInstance inst{full_square(2), 1.5};
  const auto ex = exact_expansion_small(inst);
  SplitMix64 rng(64);
  GffState st = make_initial_state(inst);
  for (int s = 0; s < 2000; ++s) gibbs_sweep(inst, st, rng);
  const int sweeps = 150000;
  std::vector<double> counts(ex.subset_probs.size(), 0.0);
  for (int s = 0; s < sweeps; ++s) {
    gibbs_sweep(inst, st, rng);
    std::size_t mask = 0;
    for (std::size_t j = 0; j < ex.omega_sites.size(); ++j) {
      if (st.pinned[ex.omega_sites[j]]) mask |= std::size_t{1} << j;
    }
    counts[mask] += 1.0;
  }
  for (auto& c : counts) c /= sweeps;
  double err = 0.0;
  for (double p : ex.subset_probs) err += std::sqrt(p * (1 - p) / sweeps);
  err *= 0.5;
  REQUIRE(total_variation(counts, ex.subset_probs) <= 3.0 * err);
}

TEST_CASE("pinned fraction estimates: exact zero and monotone in eta") {
  {
    GffInstance inst{full_square(4), 0.0};
    SplitMix64 rng(65);
    const auto est = pinned_fraction_estimate(inst, 500, 100, rng);
    REQUIRE(est.mean == 0.0);
  }
  const auto env = gen_bernoulli(8, Geometry::square, 0.5, 11);
  SplitMix64 r1 = substream(66, 0), r2 = substream(66, 0);
  const auto weak = pinned_fraction_estimate({env, 0.5}, 20000, 2000, r1);
  const auto strong = pinned_fraction_estimate({env, 2.0}, 20000, 2000, r2);
  REQUIRE(weak.mean < strong.mean);
  REQUIRE_THROWS_AS(pinned_fraction_estimate({env, 1.0}, 10, 10, r1),
                    std::invalid_argument);
}

TEST_CASE("sampler mean pinned count agrees with the expansion on 3x3") {
  GffInstance inst{full_square(3), 2.0};
  const auto ex = exact_expansion_small(inst);
  SplitMix64 rng(67);
  const auto est = pinned_fraction_estimate(inst, 60000, 5000, rng);
  const double exact_fraction = ex.expected_pinned / 9.0;
  REQUIRE(std::abs(est.mean - exact_fraction) <= 3.0 * est.stderr_);
}

TEST_CASE("coupling-derivative identity via finite differences") {
  for (int n : {2, 3}) {
    GffInstance inst{full_square(n), 2.0};
    const double h = 1e-4;
    GffInstance up = inst, dn = inst;
    up.eta += h;
    dn.eta -= h;
    const double lhs = (exact_expansion_small(up).log_ratio -
                        exact_expansion_small(dn).log_ratio) /
                       (2 * h);
    const double rhs = exact_expansion_small(inst).expected_pinned / inst.eta;
    REQUIRE_THAT(lhs, Catch::Matchers::WithinRel(rhs, 1e-6));
  }
}

TEST_CASE("single-site ratio bound: scan and stability") {
  // boundary-adjacent sites across sizes
  double cmin = 1e300, cmax = 0.0;
  for (int n : {4, 8, 12}) {
    const auto rb = ratio_bound_check(n, (n + 1) / 2, (n + 1) / 2);
    cmin = std::min(cmin, rb.empirical_c);
    cmax = std::max(cmax, rb.empirical_c);
    REQUIRE(rb.ratio > 0.0);
  }
  REQUIRE(cmax <= 2.0 * cmin);
  // every site of the 8-box yields a positive constant
  const double c8 = min_empirical_ratio_constant(8);
  REQUIRE(c8 > 0.3);
  for (int x : {1, 4, 8}) {
    const auto rb = ratio_bound_check(8, x, 1);
    REQUIRE(rb.empirical_c >= c8 - 1e-12);
  }
}

TEST_CASE("coarse-grained pinning bound") {
  const double c = min_empirical_ratio_constant(12);
  {
    // all-ones 4x4 box: bound is valid and below the exact log ratio
    GffInstance inst{full_square(4), 2.0};
    const auto bound = good_region_pinning_bound(inst, 2, 0.25, 0.25, c);
    REQUIRE(!bound.degenerate);
    REQUIRE(bound.pinned_sites.size() == 4);  // one site per good cell
    const auto ex = exact_expansion_small(inst);
    REQUIRE(bound.log_bound <= ex.log_ratio);
    REQUIRE(bound.log_bound >= 0.0);
    // monotone in eta through the per-site reward factor
    GffInstance weaker = inst;
    weaker.eta = 1.0;
    const auto low = good_region_pinning_bound(weaker, 2, 0.25, 0.25, c);
    REQUIRE(low.log_bound <= bound.log_bound);
  }
  {
    // empty environment: degenerate bound, reported as zero
    GffInstance inst{gen_bernoulli(4, Geometry::square, 0.0, 1), 2.0};
    const auto bound = good_region_pinning_bound(inst, 2, 0.25, 0.25, c);
    REQUIRE(bound.degenerate);
    REQUIRE(bound.log_bound == 0.0);
  }
}
