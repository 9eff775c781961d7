#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "polypin/rng.hpp"

namespace polypin {

// Sums over increasing index tuples of reciprocal gap products. With
// prefix sums T_l = delta_1 + ... + delta_l (T_0 = 0) and a tuple
// 0 < l_1 < ... < l_r <= m, the plain sum multiplies 1/(T_{l_i}-T_{l_{i-1}})
// over i = 1..r; the periodized variant replaces the first factor by the
// complementary arc of the cycle of total length `budget`, which restores
// invariance under cyclic shifts and reversal.

struct GapVector {
  double budget = 0.0;          // total cycle length (N + 1)
  std::vector<double> delta;    // positive entries summing to budget
};

inline GapVector uniform_gaps(int m, double budget) {
  if (m < 1 || !(budget > 0.0)) throw std::invalid_argument("uniform_gaps");
  return GapVector{budget, std::vector<double>(m, budget / m)};
}

// Flat (Dirichlet(1,...,1)) point of the open simplex {delta > 0,
// sum = budget} via normalized exponential spacings.
inline GapVector random_interior_gaps(int m, double budget, SplitMix64& rng) {
  if (m < 1 || !(budget > 0.0)) {
    throw std::invalid_argument("random_interior_gaps");
  }
  std::vector<double> e(m);
  double total = 0.0;
  for (auto& x : e) {
    x = -std::log(1.0 - uniform01(rng));
    total += x;
  }
  for (auto& x : e) x *= budget / total;
  return GapVector{budget, std::move(e)};
}

namespace detail {

inline void check_tuple_args(std::size_t m, int r) {
  if (m < 1 || m > 24) {
    throw std::invalid_argument("gap sums: need 1 <= m <= 24");
  }
  if (r < 1 || static_cast<std::size_t>(r) > m) {
    throw std::invalid_argument("gap sums: need 1 <= r <= m");
  }
}

// Iterate all increasing r-tuples from {1..m}; f(l) gets 1-based indices.
template <typename F>
inline void for_each_tuple(int m, int r, F&& f) {
  std::vector<int> l(r);
  std::iota(l.begin(), l.end(), 1);
  while (true) {
    f(l);
    int i = r - 1;
    while (i >= 0 && l[i] == m - (r - 1 - i)) --i;
    if (i < 0) break;
    ++l[i];
    for (int k = i + 1; k < r; ++k) l[k] = l[k - 1] + 1;
  }
}

inline std::vector<double> prefix_sums(const std::vector<double>& delta) {
  std::vector<double> t(delta.size() + 1, 0.0);
  for (std::size_t i = 0; i < delta.size(); ++i) t[i + 1] = t[i] + delta[i];
  return t;
}

}  // namespace detail

inline double gap_product_sum(const std::vector<double>& delta, int r) {
  detail::check_tuple_args(delta.size(), r);
  const auto t = detail::prefix_sums(delta);
  const int m = static_cast<int>(delta.size());
  double total = 0.0;
  detail::for_each_tuple(m, r, [&](const std::vector<int>& l) {
    double term = 1.0;
    int prev = 0;
    for (int li : l) {
      term /= (t[li] - t[prev]);
      prev = li;
    }
    total += term;
  });
  return total;
}

// Periodized variant; delta[0] plays the wrapped first gap, so the first
// factor of each term is the complementary arc delta_{l_r+1} + ... +
// delta_m + delta_1 + ... + delta_{l_1}. On the simplex this equals
// budget - (T_{l_r} - T_{l_1}); computing it from the coordinates keeps
// the function well defined off the simplex too.
inline double gap_product_sum_periodic(const GapVector& g, int r) {
  detail::check_tuple_args(g.delta.size(), r);
  const auto t = detail::prefix_sums(g.delta);
  const int m = static_cast<int>(g.delta.size());
  double total = 0.0;
  detail::for_each_tuple(m, r, [&](const std::vector<int>& l) {
    double term = 1.0 / (t[m] - t[l[r - 1]] + t[l[0]]);
    for (int i = 1; i < r; ++i) term /= (t[l[i]] - t[l[i - 1]]);
    total += term;
  });
  return total;
}

// Value and gradient of the periodized sum with respect to the m entries.
inline double gap_product_sum_periodic_grad(const GapVector& g, int r,
                                            std::vector<double>& grad) {
  detail::check_tuple_args(g.delta.size(), r);
  const auto t = detail::prefix_sums(g.delta);
  const int m = static_cast<int>(g.delta.size());
  grad.assign(m, 0.0);
  std::vector<double> diff(m + 2, 0.0);  // range-add accumulator (1-based)
  double total = 0.0;
  detail::for_each_tuple(m, r, [&](const std::vector<int>& l) {
    const double wrap = t[m] - t[l[r - 1]] + t[l[0]];
    double term = 1.0 / wrap;
    for (int i = 1; i < r; ++i) term /= (t[l[i]] - t[l[i - 1]]);
    total += term;
    // d(term)/d(delta_u) = -term * sum over segments containing u of 1/s.
    const double cw = -term / wrap;  // wrap covers (l_r, m] and [1, l_1]
    diff[l[r - 1] + 1] += cw;
    diff[m + 1] -= cw;
    diff[1] += cw;
    diff[l[0] + 1] -= cw;
    for (int i = 1; i < r; ++i) {
      const double ci = -term / (t[l[i]] - t[l[i - 1]]);
      diff[l[i - 1] + 1] += ci;
      diff[l[i] + 1] -= ci;
    }
  });
  double acc = 0.0;
  for (int u = 1; u <= m; ++u) {
    acc += diff[u];
    grad[u - 1] = acc;
  }
  return total;
}

// Euclidean projection onto {x >= floor, sum x = budget}.
inline std::vector<double> project_to_simplex(std::vector<double> y,
                                              double budget, double floor_) {
  const std::size_t m = y.size();
  const double shifted_budget = budget - floor_ * m;
  for (auto& v : y) v -= floor_;
  std::vector<double> u = y;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  for (std::size_t i = 0; i < m; ++i) {
    css += u[i];
    const double t = (css - shifted_budget) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = static_cast<int>(i + 1);
      theta = t;
    }
  }
  (void)rho;
  for (auto& v : y) v = std::max(0.0, v - theta) + floor_;
  return y;
}

struct MinimizeResult {
  GapVector minimizer;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_deviation_from_uniform = 0.0;
};

// Projected gradient descent with Armijo backtracking on the simplex.
// The objective is convex and blows up on the boundary, so iterates stay
// interior; a small floor guards the first steps.
inline MinimizeResult minimize_periodic_sum(int m, int r, double budget,
                                            double tolerance, SplitMix64& rng,
                                            int max_iterations = 20000) {
  if (m > 12) {
    throw std::invalid_argument("minimize_periodic_sum: need m <= 12");
  }
  if (r == 1) {
    // Every term sees the whole cycle: the sum is constant m/budget on the
    // simplex, so the uniform point is (one) minimizer.
    MinimizeResult res;
    res.minimizer = uniform_gaps(m, budget);
    res.value = m / budget;
    res.converged = true;
    return res;
  }
  GapVector x = random_interior_gaps(m, budget, rng);
  const double floor_ = 1e-9 * budget;
  std::vector<double> grad;
  double fx = gap_product_sum_periodic_grad(x, r, grad);
  MinimizeResult res;
  const double probe_step = 0.1 * budget / m;
  for (int it = 0; it < max_iterations; ++it) {
    res.iterations = it + 1;
    double gnorm = 0.0;
    for (double gi : grad) gnorm += gi * gi;
    gnorm = std::sqrt(gnorm);
    if (gnorm == 0.0) {
      res.converged = true;
      break;
    }
    // First-order optimality: a fixed-length projected step that barely
    // moves the iterate means we sit at the constrained minimum.
    GapVector trial = x;
    {
      std::vector<double> y(m);
      const double alpha = probe_step / gnorm;
      for (int i = 0; i < m; ++i) y[i] = x.delta[i] - alpha * grad[i];
      trial.delta = project_to_simplex(std::move(y), budget, floor_);
      double move = 0.0;
      for (int i = 0; i < m; ++i) {
        move = std::max(move, std::abs(trial.delta[i] - x.delta[i]));
      }
      if (move < tolerance * 1e-3) {
        res.converged = true;
        break;
      }
    }
    bool accepted = false;
    bool stagnant = false;
    double alpha = probe_step / gnorm;
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> y(m);
      for (int i = 0; i < m; ++i) y[i] = x.delta[i] - alpha * grad[i];
      trial.delta = project_to_simplex(std::move(y), budget, floor_);
      const double ft = gap_product_sum_periodic(trial, r);
      double decrease = 0.0;
      for (int i = 0; i < m; ++i) {
        decrease += grad[i] * (x.delta[i] - trial.delta[i]);
      }
      if (ft <= fx - 1e-4 * decrease) {
        accepted = true;
        stagnant = bt > 0 && fx - ft <= std::abs(fx) * 1e-14;
        break;
      }
      alpha *= 0.5;
    }
    if (accepted) {
      x = trial;
      fx = gap_product_sum_periodic_grad(x, r, grad);
    }
    if (!accepted || stagnant) {
      // Function progress exhausted at rounding level: stationary.
      res.converged = true;
      break;
    }
  }
  res.minimizer = x;
  res.value = fx;
  const double target = budget / m;
  for (double d : x.delta) {
    res.max_deviation_from_uniform =
        std::max(res.max_deviation_from_uniform, std::abs(d - target));
  }
  return res;
}

// Count of midpoint-convexity violations over random simplex pairs.
inline int midpoint_convexity_violations(int m, int r, double budget,
                                         int trials, SplitMix64& rng,
                                         bool periodic = true,
                                         double tolerance = 1e-12) {
  int violations = 0;
  for (int t = 0; t < trials; ++t) {
    const GapVector a = random_interior_gaps(m, budget, rng);
    const GapVector b = random_interior_gaps(m, budget, rng);
    GapVector mid{budget, std::vector<double>(m)};
    for (int i = 0; i < m; ++i) {
      mid.delta[i] = 0.5 * (a.delta[i] + b.delta[i]);
    }
    double fa, fb, fm;
    if (periodic) {
      fa = gap_product_sum_periodic(a, r);
      fb = gap_product_sum_periodic(b, r);
      fm = gap_product_sum_periodic(mid, r);
    } else {
      fa = gap_product_sum(a.delta, r);
      fb = gap_product_sum(b.delta, r);
      fm = gap_product_sum(mid.delta, r);
    }
    if (fm > 0.5 * (fa + fb) + tolerance) ++violations;
  }
  return violations;
}

struct SumComparison {
  double plain = 0.0;             // sum with true first gap
  double periodic = 0.0;          // periodized coordinates
  double periodic_uniform = 0.0;  // equal-spacing value, the global minimum
};

// The chain plain >= periodic >= periodic_uniform for gaps whose total is
// at most the budget. The periodized coordinates replace delta_1 by
// budget - sum_{i>=2} delta_i.
inline SumComparison compare_sums(const std::vector<double>& delta, int r,
                                  double budget) {
  detail::check_tuple_args(delta.size(), r);
  double tail = 0.0;
  for (std::size_t i = 1; i < delta.size(); ++i) tail += delta[i];
  if (!(budget - tail > 0.0)) {
    throw std::invalid_argument("compare_sums: budget too small");
  }
  SumComparison out;
  out.plain = gap_product_sum(delta, r);
  GapVector per{budget, delta};
  per.delta[0] = budget - tail;
  out.periodic = gap_product_sum_periodic(per, r);
  out.periodic_uniform = gap_product_sum_periodic(
      uniform_gaps(static_cast<int>(delta.size()), budget), r);
  return out;
}

// Closed-form lower bound (log K)^{r-1} / (Delta^{r-1} budget) on the
// equal-spacing periodized sum, with Delta = budget/m. Requires the
// restricted tuple family (consecutive index gaps <= K) to fit: needs
// 1 + (r-1) K <= m.
inline double periodic_uniform_lower_bound(int m, int r, int K,
                                           double budget) {
  if (K < 2) {
    throw std::invalid_argument("periodic_uniform_lower_bound: need K >= 2");
  }
  if (r < 1 || 1 + (r - 1) * K > m) {
    throw std::invalid_argument(
        "periodic_uniform_lower_bound: infeasible (m, r, K)");
  }
  const double gap = budget / m;
  return std::pow(std::log(static_cast<double>(K)), r - 1) /
         (std::pow(gap, r - 1) * budget);
}

struct JensenBound {
  double lhs_min = 0.0;  // min over tuples of prod (gap)^{-1/2}
  double rhs = 0.0;      // (r / horizon)^{r/2}
};

// Geometric-mean bound: every increasing r-tuple drawn from sites within
// {1..horizon} satisfies prod (t_{l_i} - t_{l_{i-1}})^{-1/2} >= (r/horizon)^{r/2}
// because the gaps total at most the horizon. Exhaustive when C(m, r) is
// small, sampled otherwise.
inline JensenBound jensen_gap_bound(const std::vector<int>& sites, int r,
                                    int horizon,
                                    std::size_t exhaustive_cap = 500000,
                                    SplitMix64* rng = nullptr,
                                    int samples = 20000) {
  const int m = static_cast<int>(sites.size());
  detail::check_tuple_args(sites.size(), r);
  if (sites.back() > horizon) {
    throw std::invalid_argument("jensen_gap_bound: sites exceed horizon");
  }
  auto tuple_value = [&](const std::vector<int>& l) {
    double v = 1.0;
    int prev = 0;
    for (int li : l) {
      v /= std::sqrt(static_cast<double>(sites[li - 1] - prev));
      prev = sites[li - 1];
    }
    return v;
  };
  double n_tuples = 1.0;
  for (int i = 0; i < r; ++i) n_tuples *= double(m - i) / double(i + 1);
  JensenBound out;
  out.rhs = std::pow(static_cast<double>(r) / horizon, r / 2.0);
  out.lhs_min = std::numeric_limits<double>::infinity();
  if (n_tuples <= static_cast<double>(exhaustive_cap) || rng == nullptr) {
    detail::for_each_tuple(m, r, [&](const std::vector<int>& l) {
      out.lhs_min = std::min(out.lhs_min, tuple_value(l));
    });
  } else {
    std::vector<int> l(r);
    for (int s = 0; s < samples; ++s) {
      // r distinct indices via partial Fisher-Yates, then sort.
      std::vector<int> pool(m);
      std::iota(pool.begin(), pool.end(), 1);
      for (int i = 0; i < r; ++i) {
        const int pick =
            i + static_cast<int>(uniform01(*rng) * (m - i));
        std::swap(pool[i], pool[std::min(pick, m - 1)]);
        l[i] = pool[i];
      }
      std::sort(l.begin(), l.end());
      out.lhs_min = std::min(out.lhs_min, tuple_value(l));
    }
  }
  return out;
}

}  // namespace polypin
