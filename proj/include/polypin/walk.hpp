#pragma once

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "polypin/rng.hpp"

namespace polypin {

// Lazy simple walk on Z^d: each coordinate independently stays put with
// probability 1/2 and moves +-1 with probability 1/4 each. Symmetric,
// aperiodic, per-coordinate variance 1/2. One lazy coordinate after k
// steps is distributed as half of a 2k-step simple walk, so
//   P0(X_k = x) = C(2k, k+x) 4^{-k},
// which gives the return probabilities in closed form.
struct WalkKernel {
  int dimension = 1;

  static constexpr double stay_probability = 0.5;
  static constexpr double move_probability = 0.25;  // each of +1, -1

  double coordinate_variance() const { return 2.0 * move_probability; }
};

inline WalkKernel make_lazy_walk(int dimension) {
  if (dimension != 1 && dimension != 2) {
    throw std::invalid_argument("make_lazy_walk: dimension must be 1 or 2");
  }
  return WalkKernel{dimension};
}

// One lazy coordinate step in {-1, 0, +1}.
inline int sample_lazy_step(SplitMix64& rng) {
  const double u = uniform01(rng);
  if (u < 0.5) return 0;
  return (u < 0.75) ? 1 : -1;
}

// P0(X_j = x) for a single lazy coordinate.
inline double lazy_point_probability(int j, int x) {
  if (j < 0) throw std::invalid_argument("lazy_point_probability: j < 0");
  if (std::abs(x) > j) return 0.0;
  if (j == 0) return 1.0;
  // C(2j, j+x) 4^{-j} via lgamma; relative error ~1e-12 at desk scales.
  return std::exp(std::lgamma(2.0 * j + 1.0) - std::lgamma(j + x + 1.0) -
                  std::lgamma(j - x + 1.0) - 2.0 * j * std::numbers::ln2);
}

struct ReturnProbTable {
  int dimension = 1;
  int max_time = 0;
  std::vector<double> p;      // p[k] = P0(X_k = 0), k = 0..max_time
  std::vector<double> log_p;  // log of the same, accumulated exactly
};

// Exact return probabilities. In d=1, p_{k+1} = p_k (2k+1)/(2k+2) from the
// central binomial closed form; d=2 entries are squares of d=1 entries
// (independent coordinates).
inline ReturnProbTable return_probabilities(const WalkKernel& kernel,
                                            int max_time) {
  if (max_time < 0) {
    throw std::invalid_argument("return_probabilities: max_time < 0");
  }
  ReturnProbTable table;
  table.dimension = kernel.dimension;
  table.max_time = max_time;
  table.p.resize(max_time + 1);
  table.log_p.resize(max_time + 1);
  double p1 = 1.0;      // d=1 value at current k
  double log_p1 = 0.0;  // its log, accumulated term by term
  for (int k = 0; k <= max_time; ++k) {
    if (kernel.dimension == 1) {
      table.p[k] = p1;
      table.log_p[k] = log_p1;
    } else {
      table.p[k] = p1 * p1;
      table.log_p[k] = 2.0 * log_p1;
    }
    const double ratio = (2.0 * k + 1.0) / (2.0 * k + 2.0);
    p1 *= ratio;
    log_p1 += std::log(ratio);
  }
  return table;
}

// Estimate of lim_k p_k k^{d/2} from the tail of the table (one Richardson
// step removes the O(1/k) correction). Requires max_time >= 1000 so the
// plateau is actually visible.
inline double clt_constant_estimate(const ReturnProbTable& table) {
  if (table.max_time < 1000) {
    throw std::invalid_argument(
        "clt_constant_estimate: table too short (need max_time >= 1000)");
  }
  const double half_exp = table.dimension / 2.0;
  auto scaled = [&](int k) {
    return table.p[k] * std::pow(static_cast<double>(k), half_exp);
  };
  const int k = table.max_time;
  const double a_full = scaled(k);
  const double a_half = scaled(k / 2);
  const double a_decade = scaled(k / 10);
  if (std::abs(a_full - a_decade) > 1e-2 * a_full) {
    throw std::invalid_argument(
        "clt_constant_estimate: no plateau over the last decade");
  }
  const double estimate = 2.0 * a_full - a_half;
  if (!(estimate > 0.0)) {
    throw std::invalid_argument("clt_constant_estimate: non-positive limit");
  }
  return estimate;
}

// Largest c with p_k >= c k^{-d/2} for every 1 <= k <= max_time; this is the
// constant to feed into the explicit lower-bound formulas so they stay
// valid at every finite gap, not just asymptotically.
inline double min_local_clt_constant(const ReturnProbTable& table) {
  if (table.max_time < 1) {
    throw std::invalid_argument("min_local_clt_constant: empty table");
  }
  const double half_exp = table.dimension / 2.0;
  double c = table.p[1];
  for (int k = 1; k <= table.max_time; ++k) {
    c = std::min(c, table.p[k] * std::pow(static_cast<double>(k), half_exp));
  }
  return c;
}

}  // namespace polypin
