#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "polypin/environment.hpp"
#include "polypin/errors.hpp"
#include "polypin/rng.hpp"

namespace polypin {

// Gaussian interface on {1..N}^2 with zero boundary conditions and a
// delta-pinning reward eta at sites with omega = 1. Quadratic potential
// x^2/2 per edge (boundary edges against height 0), so the field is a
// zero-mean Gaussian with precision matrix Q = 4 I - adjacency.

struct GffInstance {
  Environment env;  // square geometry
  double eta = 0.0;

  int n() const { return env.n; }
};

struct GffState {
  int n = 0;
  std::vector<double> heights;        // row-major (y-1)*n + (x-1)
  std::vector<std::uint8_t> pinned;   // 1 iff the site sits in the atom

  double& at(int x, int y) { return heights[std::size_t(y - 1) * n + (x - 1)]; }
  double at(int x, int y) const {
    return heights[std::size_t(y - 1) * n + (x - 1)];
  }
};

inline GffState make_initial_state(const GffInstance& inst) {
  if (inst.env.geometry != Geometry::square) {
    throw std::invalid_argument("make_initial_state: square geometry required");
  }
  if (!(inst.eta >= 0.0)) {
    throw std::invalid_argument("make_initial_state: eta must be >= 0");
  }
  GffState st;
  st.n = inst.n();
  st.heights.assign(std::size_t(st.n) * st.n, 0.0);
  st.pinned.assign(st.heights.size(), 0);
  return st;
}

// Single-site heat bath in raster order. Given the neighbor sum s, the
// free conditional is N(s/4, 1/4); the atom at 0 is taken with probability
// a/(1+a) where a = eta * omega * phi(0) and phi is that normal density.
inline void gibbs_sweep(const GffInstance& inst, GffState& st,
                        SplitMix64& rng) {
  const int n = st.n;
  const double eta = inst.eta;
  const double root = std::sqrt(2.0 / std::numbers::pi);
  for (int y = 1; y <= n; ++y) {
    for (int x = 1; x <= n; ++x) {
      double s = 0.0;
      if (x > 1) s += st.at(x - 1, y);
      if (x < n) s += st.at(x + 1, y);
      if (y > 1) s += st.at(x, y - 1);
      if (y < n) s += st.at(x, y + 1);
      const std::size_t idx = std::size_t(y - 1) * n + (x - 1);
      bool pin = false;
      if (inst.env.bits[idx] && eta > 0.0) {
        const double density_at_zero = root * std::exp(-s * s / 8.0);
        const double a = eta * density_at_zero;
        pin = uniform01(rng) < a / (1.0 + a);
      }
      if (pin) {
        st.heights[idx] = 0.0;
        st.pinned[idx] = 1;
      } else {
        st.heights[idx] = s / 4.0 + 0.5 * standard_normal(rng);
        st.pinned[idx] = 0;
      }
    }
  }
}

struct GffEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // batch-means standard error
  int sweeps = 0;
};

inline GffEstimate pinned_fraction_estimate(const GffInstance& inst,
                                            int sweeps, int burnin,
                                            SplitMix64& rng,
                                            int batches = 32) {
  if (sweeps <= burnin) {
    throw std::invalid_argument("pinned_fraction_estimate: sweeps <= burnin");
  }
  GffState st = make_initial_state(inst);
  for (int s = 0; s < burnin; ++s) gibbs_sweep(inst, st, rng);
  const int kept = sweeps - burnin;
  batches = std::max(2, std::min(batches, kept));
  const std::size_t sites = st.heights.size();
  std::vector<double> batch_sum(batches, 0.0);
  std::vector<int> batch_count(batches, 0);
  double total = 0.0;
  for (int s = 0; s < kept; ++s) {
    gibbs_sweep(inst, st, rng);
    int pinned = 0;
    for (auto p : st.pinned) pinned += p;
    const double frac = double(pinned) / double(sites);
    total += frac;
    const int b = static_cast<int>(std::size_t(s) * batches / kept);
    batch_sum[b] += frac;
    ++batch_count[b];
  }
  GffEstimate est;
  est.sweeps = kept;
  est.mean = total / kept;
  double var = 0.0;
  for (int b = 0; b < batches; ++b) {
    const double bm = batch_sum[b] / batch_count[b];
    var += (bm - est.mean) * (bm - est.mean);
  }
  var /= (batches - 1);
  est.stderr_ = std::sqrt(var / batches);
  return est;
}

// ---------------------------------------------------------------------------
// Exact computations via dense Cholesky log-determinants.

namespace detail {

// log det of the precision matrix 4I - A restricted to the given active
// sites of the n x n lattice (linear row-major indices).
inline double lattice_logdet(int n, const std::vector<int>& active) {
  const int k = static_cast<int>(active.size());
  if (k == 0) return 0.0;
  std::vector<int> where(std::size_t(n) * n, -1);
  for (int i = 0; i < k; ++i) where[active[i]] = i;
  std::vector<double> a(std::size_t(k) * k, 0.0);
  for (int i = 0; i < k; ++i) {
    const int site = active[i];
    const int x = site % n, y = site / n;
    a[std::size_t(i) * k + i] = 4.0;
    auto link = [&](int nx, int ny) {
      if (nx < 0 || nx >= n || ny < 0 || ny >= n) return;
      const int j = where[ny * n + nx];
      if (j >= 0) a[std::size_t(i) * k + j] = -1.0;
    };
    link(x - 1, y);
    link(x + 1, y);
    link(x, y - 1);
    link(x, y + 1);
  }
  // In-place Cholesky, lower triangle.
  double logdet = 0.0;
  for (int j = 0; j < k; ++j) {
    double d = a[std::size_t(j) * k + j];
    for (int p = 0; p < j; ++p) d -= a[std::size_t(j) * k + p] * a[std::size_t(j) * k + p];
    if (!(d > 0.0)) throw NumericalError("lattice_logdet: not positive definite");
    const double l = std::sqrt(d);
    a[std::size_t(j) * k + j] = l;
    logdet += 2.0 * std::log(l);
    for (int i = j + 1; i < k; ++i) {
      double v = a[std::size_t(i) * k + j];
      for (int p = 0; p < j; ++p) {
        v -= a[std::size_t(i) * k + p] * a[std::size_t(j) * k + p];
      }
      a[std::size_t(i) * k + j] = v / l;
    }
  }
  return logdet;
}

inline std::vector<int> all_sites(int n) {
  std::vector<int> sites(std::size_t(n) * n);
  for (std::size_t i = 0; i < sites.size(); ++i) sites[i] = static_cast<int>(i);
  return sites;
}

}  // namespace detail

struct GffExpansion {
  double log_ratio = 0.0;       // log(Z_eta / Z_0)
  double expected_pinned = 0.0;  // E |A|
  std::vector<double> size_law;     // P(|A| = k), k = 0..|Omega|
  std::vector<double> subset_probs;  // P(A = S), bitmask over omega_sites
  std::vector<int> omega_sites;      // linear indices, raster order
};

// Z_eta / Z_0 = sum over pinned subsets A of eta^{|A|} (2 pi)^{-|A|/2}
// (det Q_{L\A} / det Q_L)^{-1/2}, by integrating out the pinned sites.
inline GffExpansion exact_expansion_small(const GffInstance& inst) {
  if (inst.env.geometry != Geometry::square) {
    throw std::invalid_argument("exact_expansion_small: square required");
  }
  const int n = inst.n();
  GffExpansion out;
  for (std::size_t i = 0; i < inst.env.bits.size(); ++i) {
    if (inst.env.bits[i]) out.omega_sites.push_back(static_cast<int>(i));
  }
  const int omega = static_cast<int>(out.omega_sites.size());
  if (omega > 16) {
    throw std::invalid_argument("exact_expansion_small: |Omega| > 16");
  }
  const double logdet_full = detail::lattice_logdet(n, detail::all_sites(n));
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  const std::size_t subsets = std::size_t{1} << omega;
  std::vector<double> weight(subsets, 0.0);
  double total = 0.0, weighted_size = 0.0;
  out.size_law.assign(omega + 1, 0.0);
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    const int size = std::popcount(static_cast<std::uint64_t>(mask));
    double wgt;
    if (mask == 0) {
      wgt = 1.0;
    } else if (inst.eta == 0.0) {
      wgt = 0.0;
    } else {
      std::vector<int> active;
      active.reserve(std::size_t(n) * n);
      std::vector<bool> drop(std::size_t(n) * n, false);
      for (int j = 0; j < omega; ++j) {
        if (mask & (std::size_t{1} << j)) drop[out.omega_sites[j]] = true;
      }
      for (int s = 0; s < n * n; ++s) {
        if (!drop[s]) active.push_back(s);
      }
      const double logdet_sub = detail::lattice_logdet(n, active);
      wgt = std::exp(size * std::log(inst.eta) - 0.5 * size * log_2pi -
                     0.5 * (logdet_sub - logdet_full));
    }
    weight[mask] = wgt;
    total += wgt;
    weighted_size += wgt * size;
    out.size_law[size] += wgt;
  }
  out.log_ratio = std::log(total);
  out.expected_pinned = weighted_size / total;
  for (auto& v : out.size_law) v /= total;
  out.subset_probs = std::move(weight);
  for (auto& v : out.subset_probs) v /= total;
  return out;
}

// Exact single-site ratio Z_{B\{t},0} / Z_{B,0} on the full n x n box,
// together with sqrt(log(1 + d(t, boundary))) and their product, the
// empirical constant of the single-site lower bound.
struct RatioBound {
  double ratio = 0.0;
  double sqrt_log_distance = 0.0;
  double empirical_c = 0.0;
  int distance = 0;
};

inline RatioBound ratio_bound_check(int n, int x, int y) {
  if (n < 1 || n > 12) {
    throw std::invalid_argument("ratio_bound_check: need 1 <= n <= 12");
  }
  if (x < 1 || x > n || y < 1 || y > n) {
    throw std::invalid_argument("ratio_bound_check: site outside the box");
  }
  const double logdet_full = detail::lattice_logdet(n, detail::all_sites(n));
  std::vector<int> active;
  const int drop = (y - 1) * n + (x - 1);
  for (int s = 0; s < n * n; ++s) {
    if (s != drop) active.push_back(s);
  }
  const double logdet_sub = detail::lattice_logdet(n, active);
  RatioBound out;
  out.ratio = std::exp(-0.5 * std::log(2.0 * std::numbers::pi) -
                       0.5 * (logdet_sub - logdet_full));
  out.distance = std::min(std::min(x, y), std::min(n + 1 - x, n + 1 - y));
  out.sqrt_log_distance = std::sqrt(std::log(1.0 + out.distance));
  out.empirical_c = out.ratio * out.sqrt_log_distance;
  return out;
}

// Smallest empirical constant over every site of the n x n box.
inline double min_empirical_ratio_constant(int n) {
  double c = std::numeric_limits<double>::infinity();
  for (int y = 1; y <= n; ++y) {
    for (int x = 1; x <= n; ++x) {
      c = std::min(c, ratio_bound_check(n, x, y).empirical_c);
    }
  }
  return c;
}

struct GoodRegionBound {
  double log_bound = 0.0;
  bool degenerate = false;          // no good rows / no usable sites
  std::vector<std::array<int, 2>> pinned_sites;  // the chosen set, (x, y)
};

// Coarse-grained lower bound on log(Z_eta / Z_0): pick one reward site per
// good cell inside each good row, then telescope single-site ratios along
// rows (left anchor just outside the box) with the bound
// ratio >= c / sqrt(log(1 + distance-to-previous-pinned-site)).
inline GoodRegionBound good_region_pinning_bound(const GffInstance& inst,
                                                 int cell_side, double rho,
                                                 double zeta, double c) {
  if (!(c > 0.0)) {
    throw std::invalid_argument("good_region_pinning_bound: need c > 0");
  }
  const CellAnalysis cells = analyze_cells(inst.env, cell_side, rho, zeta);
  const int per_side = cells.cells_per_side;
  GoodRegionBound out;
  double sum = 0.0;
  for (int cy = 0; cy < per_side; ++cy) {
    if (!cells.good_row[cy]) continue;
    std::array<int, 2> prev = {0, 0};
    bool have_prev = false;
    for (int cx = 0; cx < per_side; ++cx) {
      if (!cells.good_cell[std::size_t(cy) * per_side + cx]) continue;
      // Smallest-x reward site of the cell (ties by y).
      std::array<int, 2> chosen = {0, 0};
      bool found = false;
      for (int x = cx * cell_side + 1; x <= (cx + 1) * cell_side && !found;
           ++x) {
        for (int y = cy * cell_side + 1; y <= (cy + 1) * cell_side; ++y) {
          if (inst.env.at(x, y)) {
            chosen = {x, y};
            found = true;
            break;
          }
        }
      }
      if (!found) continue;  // possible only when rho * K^2 < 1
      if (!have_prev) {
        prev = {0, chosen[1]};  // anchor outside the box, same row
        have_prev = true;
      }
      const double dx = chosen[0] - prev[0];
      const double dy = chosen[1] - prev[1];
      const double dist = std::sqrt(dx * dx + dy * dy);
      sum += std::log(inst.eta) + std::log(c) -
             0.5 * std::log(std::log(1.0 + dist));
      out.pinned_sites.push_back(chosen);
      prev = chosen;
    }
  }
  if (out.pinned_sites.empty()) {
    out.degenerate = true;
    out.log_bound = 0.0;
    return out;
  }
  // The expansion also contains the empty set with weight 1, so the log
  // ratio is never negative.
  out.log_bound = std::max(0.0, sum);
  return out;
}

// Total variation distance between two distributions over the same index set.
inline double total_variation(const std::vector<double>& a,
                              const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("total_variation: size mismatch");
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

}  // namespace polypin
