#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "polypin/environment.hpp"
#include "polypin/renewal.hpp"
#include "polypin/walk.hpp"

namespace polypin {

// Ground truth by exhaustive path enumeration. No renewal structure, no
// rescaling: the defining sum over step sequences, in plain double
// arithmetic, feasible up to N = 12 (d=1) and N = 8 (d=2).

struct PolymerEnumeration {
  double z = 0.0;
  std::vector<double> contact_probs;  // per ordered site of Omega
  double expected_contacts = 0.0;
};

namespace detail {

struct StepLaw {
  static constexpr std::array<int, 3> value = {0, 1, -1};
  static constexpr std::array<double, 3> prob = {0.5, 0.25, 0.25};
};

// Depth-first walk over all step sequences of one lazy coordinate,
// accumulating the probability of each exact zero-visit pattern on
// {1..n} (bit i-1 of the mask = "X_i = 0").
inline void pattern_dfs(int time, int n, int pos, double prob,
                        std::uint32_t mask, std::vector<double>& out) {
  if (time == n) {
    out[mask] += prob;
    return;
  }
  for (int s = 0; s < 3; ++s) {
    const int next = pos + StepLaw::value[s];
    const std::uint32_t next_mask =
        next == 0 ? (mask | (1u << time)) : mask;
    pattern_dfs(time + 1, n, next, prob * StepLaw::prob[s], next_mask, out);
  }
}

}  // namespace detail

// P(zero-visit pattern = mask) for one lazy coordinate over n steps.
inline std::vector<double> zero_pattern_distribution(int n) {
  if (n < 0 || n > 16) {
    throw std::invalid_argument("zero_pattern_distribution: need 0 <= n <= 16");
  }
  std::vector<double> out(std::size_t{1} << n, 0.0);
  detail::pattern_dfs(0, n, 0, 1.0, 0u, out);
  return out;
}

// Joint zero-pattern law of two independent coordinates: both must be zero.
inline std::vector<double> joint_zero_pattern_distribution(
    const std::vector<double>& q1) {
  const std::size_t size = q1.size();
  std::vector<double> out(size, 0.0);
  for (std::size_t a = 0; a < size; ++a) {
    if (q1[a] == 0.0) continue;
    for (std::size_t b = 0; b < size; ++b) {
      out[a & b] += q1[a] * q1[b];
    }
  }
  return out;
}

// Partition function and contact marginals from a zero-pattern law.
inline PolymerEnumeration evaluate_pattern_law(
    const std::vector<double>& pattern_law, const Environment& env,
    double eta) {
  const auto sites = contact_sites(env).t;
  std::uint32_t omega_mask = 0;
  for (int t : sites) omega_mask |= 1u << (t - 1);
  PolymerEnumeration out;
  out.contact_probs.assign(sites.size(), 0.0);
  for (std::size_t mask = 0; mask < pattern_law.size(); ++mask) {
    const double q = pattern_law[mask];
    if (q == 0.0) continue;
    const int contacts =
        std::popcount(static_cast<std::uint32_t>(mask) & omega_mask);
    const double weight = q * std::exp(eta * contacts);
    out.z += weight;
    for (std::size_t j = 0; j < sites.size(); ++j) {
      if (mask & (1u << (sites[j] - 1))) out.contact_probs[j] += weight;
    }
  }
  for (auto& mu : out.contact_probs) {
    mu /= out.z;
    out.expected_contacts += mu;
  }
  return out;
}

// Literal sum over step sequences (3^n in d=1, 9^n in d=2).
inline PolymerEnumeration enumerate_polymer(const Environment& env,
                                            const WalkKernel& kernel,
                                            double eta) {
  if (env.geometry != Geometry::segment) {
    throw std::invalid_argument("enumerate_polymer: segment required");
  }
  const int n = env.n;
  if ((kernel.dimension == 1 && n > 12) || (kernel.dimension == 2 && n > 8)) {
    throw std::invalid_argument("enumerate_polymer: n too large to enumerate");
  }
  const auto sites = contact_sites(env).t;
  PolymerEnumeration out;
  out.contact_probs.assign(sites.size(), 0.0);

  std::vector<int> site_at_time(n + 1, -1);  // index into sites, or -1
  for (std::size_t j = 0; j < sites.size(); ++j) site_at_time[sites[j]] = (int)j;

  std::uint32_t zero_mask = 0;  // times i with X_i = 0, bit i-1
  auto dfs = [&](auto&& self, int time, int x1, int x2, double prob) -> void {
    if (time == n) {
      int contacts = 0;
      for (std::size_t j = 0; j < sites.size(); ++j) {
        if (zero_mask & (1u << (sites[j] - 1))) ++contacts;
      }
      const double weight = prob * std::exp(eta * contacts);
      out.z += weight;
      for (std::size_t j = 0; j < sites.size(); ++j) {
        if (zero_mask & (1u << (sites[j] - 1))) out.contact_probs[j] += weight;
      }
      return;
    }
    for (int s1 = 0; s1 < 3; ++s1) {
      const int n1 = x1 + detail::StepLaw::value[s1];
      const double p1 = prob * detail::StepLaw::prob[s1];
      if (kernel.dimension == 1) {
        const bool at_zero = (n1 == 0);
        if (at_zero) zero_mask |= 1u << time;
        self(self, time + 1, n1, 0, p1);
        if (at_zero) zero_mask &= ~(1u << time);
      } else {
        for (int s2 = 0; s2 < 3; ++s2) {
          const int n2 = x2 + detail::StepLaw::value[s2];
          const double p2 = p1 * detail::StepLaw::prob[s2];
          const bool at_zero = (n1 == 0 && n2 == 0);
          if (at_zero) zero_mask |= 1u << time;
          self(self, time + 1, n1, n2, p2);
          if (at_zero) zero_mask &= ~(1u << time);
        }
      }
    }
  };
  dfs(dfs, 0, 0, 0, 1.0);

  for (auto& mu : out.contact_probs) {
    mu /= out.z;
    out.expected_contacts += mu;
  }
  return out;
}

// Subset-expansion evaluation of the same partition function:
// Z = sum_{A subset of Omega} w^{|A|} prod p_gap. Used to check that the
// path sum factorizes the way the solver assumes.
inline double subset_expansion_z(const std::vector<int>& sites, double eta,
                                 const ReturnProbTable& table) {
  if (sites.size() > 20) {
    throw std::invalid_argument("subset_expansion_z: too many sites");
  }
  const double w = std::expm1(eta);
  const std::size_t m = sites.size();
  double z = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    double term = 1.0;
    int prev = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask & (1u << j)) {
        term *= w * table.p[sites[j] - prev];
        prev = sites[j];
      }
    }
    z += term;
  }
  return z;
}

// Exhaustive solver-vs-oracle comparison over every environment of length
// <= max_n, every eta in the grid, both dimensions. Returns the worst
// relative discrepancy in Z, contact probabilities, expected contacts.
struct OracleComparison {
  double worst_rel_error = 0.0;
  long cases = 0;
};

inline OracleComparison compare_with_solver(int max_n,
                                            const std::vector<double>& etas,
                                            const std::vector<int>& dimensions) {
  if (max_n < 1 || max_n > 12) {
    throw std::invalid_argument("compare_with_solver: need 1 <= max_n <= 12");
  }
  OracleComparison cmp;
  auto track = [&](double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    cmp.worst_rel_error = std::max(cmp.worst_rel_error, std::abs(a - b) / scale);
  };
  for (int n = 1; n <= max_n; ++n) {
    const auto q1 = zero_pattern_distribution(n);
    std::vector<double> q2;
    for (int dim : dimensions) {
      if (dim == 2 && q2.empty()) q2 = joint_zero_pattern_distribution(q1);
      const auto& law = dim == 1 ? q1 : q2;
      const WalkKernel kernel = make_lazy_walk(dim);
      const ReturnProbTable table = return_probabilities(kernel, n);
      for (std::uint32_t env_mask = 0; env_mask < (1u << n); ++env_mask) {
        std::vector<int> sites;
        for (int i = 1; i <= n; ++i) {
          if (env_mask & (1u << (i - 1))) sites.push_back(i);
        }
        const Environment env = environment_from_sites(n, sites);
        for (double eta : etas) {
          const auto oracle = evaluate_pattern_law(law, env, eta);
          const PinningSolution sol = solve({env, kernel, eta}, table);
          track(oracle.z, std::exp(sol.log_z));
          track(oracle.expected_contacts, sol.expected_contacts);
          for (std::size_t j = 0; j < sites.size(); ++j) {
            track(oracle.contact_probs[j], sol.contact_probs[j]);
          }
          ++cmp.cases;
        }
      }
    }
  }
  return cmp;
}

}  // namespace polypin
