#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "polypin/environment.hpp"
#include "polypin/gap_sums.hpp"
#include "polypin/gff.hpp"
#include "polypin/oracle.hpp"
#include "polypin/renewal.hpp"
#include "polypin/rng.hpp"

namespace polypin {

struct VerifyResult {
  std::string suite;
  bool passed = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    lines.push_back(std::string(ok ? "  ok: " : "  FAIL: ") + what);
    passed = passed && ok;
  }
};

namespace detail {
inline std::string fmt(const char* pattern, double v) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}
}  // namespace detail

// Solver against exhaustive enumeration, every environment up to max_n.
inline VerifyResult verify_dp_oracle(int max_n = 7) {
  VerifyResult res{"dp-oracle"};
  const auto cmp =
      compare_with_solver(max_n, {0.5, std::log(2.0), 2.0}, {1, 2});
  res.check(cmp.worst_rel_error <= 1e-10,
            "worst relative error " +
                detail::fmt("%.3e", cmp.worst_rel_error) + " over " +
                std::to_string(cmp.cases) + " cases (tol 1e-10)");
  return res;
}

// log Z as the integral of the expected contact count over the coupling.
inline VerifyResult verify_identity() {
  VerifyResult res{"identity"};
  const auto env = gen_periodic(200, Geometry::segment, 4);
  const auto kernel = make_lazy_walk(1);
  const double residual = free_energy_integral_check(env, kernel, 2.0, 10000);
  res.check(residual <= 1e-6,
            "residual " + detail::fmt("%.3e", residual) +
                " with 1e4 nodes (tol 1e-6)");
  // The integrand is nondecreasing in the coupling.
  const auto table = return_probabilities(kernel, env.n);
  double prev = -1.0;
  bool monotone = true;
  for (int i = 0; i <= 20; ++i) {
    const auto sol = solve({env, kernel, 0.1 * i}, table);
    monotone = monotone && sol.expected_contacts >= prev - 1e-12;
    prev = sol.expected_contacts;
  }
  res.check(monotone, "expected contacts nondecreasing in eta");
  return res;
}

// Convexity, equal-spacing minimizer, comparison chain, Jensen bound.
inline VerifyResult verify_psi(int pairs_per_case = 1000, int starts = 10) {
  VerifyResult res{"psi"};
  SplitMix64 rng = substream(20240601, 11);
  int violations = 0;
  for (int m = 2; m <= 8; ++m) {
    for (int r = 1; r <= std::min(4, m); ++r) {
      violations += midpoint_convexity_violations(m, r, double(m),
                                                  pairs_per_case, rng);
    }
  }
  res.check(violations == 0, "midpoint convexity violations = " +
                                 std::to_string(violations));
  double worst_dev = 0.0;
  bool all_converged = true;
  for (int m : {4, 6}) {
    const int r = m / 2;
    for (int s = 0; s < starts; ++s) {
      const auto min_res =
          minimize_periodic_sum(m, r, double(m) + 1.0, 1e-6, rng);
      worst_dev = std::max(worst_dev, min_res.max_deviation_from_uniform);
      all_converged = all_converged && min_res.converged;
    }
  }
  res.check(all_converged && worst_dev <= 1e-6,
            "minimizer deviation from uniform " +
                detail::fmt("%.2e", worst_dev) + " (tol 1e-6)");
  int chain_violations = 0;
  for (int s = 0; s < 200; ++s) {
    auto g = random_interior_gaps(6, 7.0, rng);
    for (auto& d : g.delta) d *= 0.9;
    const auto c = compare_sums(g.delta, 3, 7.0);
    if (!(c.plain >= c.periodic * (1 - 1e-12) &&
          c.periodic >= c.periodic_uniform * (1 - 1e-12))) {
      ++chain_violations;
    }
  }
  res.check(chain_violations == 0,
            "comparison chain violations = " + std::to_string(chain_violations));
  std::vector<int> sites;
  int t = 0;
  for (int i = 0; i < 12; ++i) {
    t += 1 + static_cast<int>(uniform01(rng) * 8);
    sites.push_back(t);
  }
  const auto jb = jensen_gap_bound(sites, 4, 120);
  res.check(jb.lhs_min >= jb.rhs * (1 - 1e-12),
            "geometric-mean tuple bound: min " +
                detail::fmt("%.3e", jb.lhs_min) + " >= " +
                detail::fmt("%.3e", jb.rhs));
  return res;
}

// Sampler stationarity against the exact expansion, derivative identity,
// stability of the single-site ratio constant, coarse-grained bound.
inline VerifyResult verify_gff(int sweeps = 200000) {
  VerifyResult res{"gff"};
  {
    GffInstance inst{gen_bernoulli(2, Geometry::square, 1.0, 1), 1.5};
    const auto exact = exact_expansion_small(inst);
    SplitMix64 rng = substream(20240601, 21);
    GffState st = make_initial_state(inst);
    for (int s = 0; s < 2000; ++s) gibbs_sweep(inst, st, rng);
    std::vector<double> counts(exact.subset_probs.size(), 0.0);
    for (int s = 0; s < sweeps; ++s) {
      gibbs_sweep(inst, st, rng);
      std::size_t mask = 0;
      for (std::size_t j = 0; j < exact.omega_sites.size(); ++j) {
        if (st.pinned[exact.omega_sites[j]]) mask |= std::size_t{1} << j;
      }
      counts[mask] += 1.0;
    }
    for (auto& c : counts) c /= sweeps;
    const double tv = total_variation(counts, exact.subset_probs);
    double err = 0.0;
    for (double p : exact.subset_probs) err += std::sqrt(p * (1 - p) / sweeps);
    err *= 0.5;
    res.check(tv <= 3.0 * err, "pinned-set law TV " + detail::fmt("%.4f", tv) +
                                   " <= 3 x " + detail::fmt("%.4f", err));
  }
  {
    GffInstance inst{gen_bernoulli(3, Geometry::square, 1.0, 1), 2.0};
    const double h = 1e-4;
    GffInstance up = inst, dn = inst;
    up.eta += h;
    dn.eta -= h;
    const double lhs = (exact_expansion_small(up).log_ratio -
                        exact_expansion_small(dn).log_ratio) /
                       (2 * h);
    const double rhs = exact_expansion_small(inst).expected_pinned / inst.eta;
    const double rel = std::abs(lhs - rhs) / std::abs(rhs);
    res.check(rel <= 1e-6, "coupling-derivative identity, relative error " +
                               detail::fmt("%.2e", rel));
  }
  {
    double cmin = 1e300, cmax = 0.0;
    for (int n : {4, 8, 12}) {
      const double c = ratio_bound_check(n, (n + 1) / 2, (n + 1) / 2).empirical_c;
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
    res.check(cmax <= 2.0 * cmin,
              "single-site ratio constant stable: " +
                  detail::fmt("%.4f", cmin) + " .. " + detail::fmt("%.4f", cmax));
  }
  {
    GffInstance inst{gen_bernoulli(4, Geometry::square, 1.0, 1), 2.0};
    const double c = min_empirical_ratio_constant(12);
    const auto bound = good_region_pinning_bound(inst, 2, 0.25, 0.25, c);
    const auto exact = exact_expansion_small(inst);
    res.check(!bound.degenerate && bound.log_bound <= exact.log_ratio,
              "coarse-grained bound " + detail::fmt("%.4f", bound.log_bound) +
                  " <= exact " + detail::fmt("%.4f", exact.log_ratio));
  }
  return res;
}

// Pigeonhole counting for good cells and good rows on random environments
// satisfying the density hypothesis.
inline VerifyResult verify_cells(int trials = 1000) {
  VerifyResult res{"cells"};
  SplitMix64 rng = substream(20240601, 31);
  const double delta = 0.5, rho = 0.2, zeta = 0.08;
  int cell_violations = 0, row_violations = 0, row_cases = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = (trial % 2 == 0) ? 32 : 64;
    const int K = (trial % 3 == 0) ? 4 : 8;
    const double density = delta + (1.0 - delta) * uniform01(rng);
    Environment env = gen_bernoulli(n, Geometry::square, density, rng());
    double ones = 0;
    for (auto b : env.bits) ones += b;
    if (ones <= delta * env.site_count()) {
      --trial;  // density hypothesis not met, redraw
      continue;
    }
    const auto cells = analyze_cells(env, K, rho, zeta);
    if (!(cells.good_cell_fraction > rho / (1.0 + rho))) ++cell_violations;
    if (row_counting_bound_applies(rho, zeta) &&
        cells.good_cell_fraction > rho / (1.0 + rho)) {
      ++row_cases;
      if (!(cells.good_row_fraction > zeta / (1.0 + zeta))) ++row_violations;
    }
  }
  res.check(counting_bound_applies(delta, rho), "rho below delta/(2-delta)");
  res.check(cell_violations == 0,
            "good-cell fraction > rho/(1+rho) on " + std::to_string(trials) +
                " environments, violations = " + std::to_string(cell_violations));
  res.check(row_violations == 0,
            "good-row fraction > zeta/(1+zeta) on " + std::to_string(row_cases) +
                " applicable cases, violations = " + std::to_string(row_violations));
  return res;
}

}  // namespace polypin
