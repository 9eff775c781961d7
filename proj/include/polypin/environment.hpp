#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "polypin/rng.hpp"

namespace polypin {

enum class Geometry { segment, square };

// Dilution field omega on {1..N} (segment) or {1..N}^2 (square).
// Square sites (x, y) are stored row-major at (y-1)*n + (x-1); x is the
// first (horizontal) coordinate.
struct Environment {
  Geometry geometry = Geometry::segment;
  int n = 0;
  std::vector<std::uint8_t> bits;
  std::optional<std::uint64_t> seed;

  std::size_t site_count() const {
    return geometry == Geometry::segment
               ? static_cast<std::size_t>(n)
               : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  }
  // 1-based segment site.
  std::uint8_t at(int i) const { return bits[static_cast<std::size_t>(i) - 1]; }
  // 1-based square site.
  std::uint8_t at(int x, int y) const {
    return bits[static_cast<std::size_t>(y - 1) * n + (x - 1)];
  }
};

struct ContactSites {
  std::vector<int> t;  // strictly increasing positions with omega = 1
};

namespace detail {
inline void check_n(int n) {
  if (n < 1) throw std::invalid_argument("environment: n must be >= 1");
}
}  // namespace detail

inline Environment gen_bernoulli(int n, Geometry geometry, double density,
                                 std::uint64_t seed) {
  detail::check_n(n);
  if (!(density >= 0.0 && density <= 1.0)) {
    throw std::invalid_argument("gen_bernoulli: density must lie in [0,1]");
  }
  Environment env{geometry, n, {}, seed};
  env.bits.resize(env.site_count());
  SplitMix64 rng(seed);
  for (auto& b : env.bits) b = uniform01(rng) < density ? 1 : 0;
  return env;
}

// omega_i = 1 iff gap | i; on the square both coordinates must be multiples.
inline Environment gen_periodic(int n, Geometry geometry, int gap) {
  detail::check_n(n);
  if (gap < 1) throw std::invalid_argument("gen_periodic: gap must be >= 1");
  Environment env{geometry, n, {}, std::nullopt};
  env.bits.resize(env.site_count());
  if (geometry == Geometry::segment) {
    for (int i = 1; i <= n; ++i) env.bits[i - 1] = (i % gap == 0) ? 1 : 0;
  } else {
    for (int y = 1; y <= n; ++y) {
      for (int x = 1; x <= n; ++x) {
        env.bits[static_cast<std::size_t>(y - 1) * n + (x - 1)] =
            (x % gap == 0 && y % gap == 0) ? 1 : 0;
      }
    }
  }
  return env;
}

// Independent Bernoulli bits with a different density on each third of the
// segment (split at floor(n/3) and floor(2n/3)).
inline Environment gen_block(int n, double d1, double d2, double d3,
                             std::uint64_t seed) {
  detail::check_n(n);
  for (double d : {d1, d2, d3}) {
    if (!(d >= 0.0 && d <= 1.0)) {
      throw std::invalid_argument("gen_block: densities must lie in [0,1]");
    }
  }
  Environment env{Geometry::segment, n, {}, seed};
  env.bits.resize(env.site_count());
  SplitMix64 rng(seed);
  const int b1 = n / 3;
  const int b2 = 2 * n / 3;
  for (int i = 1; i <= n; ++i) {
    const double d = i <= b1 ? d1 : (i <= b2 ? d2 : d3);
    env.bits[i - 1] = uniform01(rng) < d ? 1 : 0;
  }
  return env;
}

// Prefix family with vanishing density: omega_i = 1 iff i <= ceil(sqrt(n)).
inline Environment gen_vanishing(int n) {
  detail::check_n(n);
  Environment env{Geometry::segment, n, {}, std::nullopt};
  env.bits.resize(env.site_count());
  const int prefix =
      static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  for (int i = 1; i <= n; ++i) env.bits[i - 1] = (i <= prefix) ? 1 : 0;
  return env;
}

inline double density(const Environment& env) {
  std::size_t ones = 0;
  for (auto b : env.bits) ones += b;
  return static_cast<double>(ones) / static_cast<double>(env.site_count());
}

inline ContactSites contact_sites(const Environment& env) {
  if (env.geometry != Geometry::segment) {
    throw std::invalid_argument("contact_sites: segment geometry required");
  }
  ContactSites sites;
  for (int i = 1; i <= env.n; ++i) {
    if (env.at(i)) sites.t.push_back(i);
  }
  return sites;
}

// Rebuild the bit field from ordered contact sites (inverse of the above).
inline Environment environment_from_sites(int n, const std::vector<int>& t) {
  detail::check_n(n);
  Environment env{Geometry::segment, n, {}, std::nullopt};
  env.bits.assign(static_cast<std::size_t>(n), 0);
  for (int site : t) {
    if (site < 1 || site > n) {
      throw std::invalid_argument("environment_from_sites: site out of range");
    }
    env.bits[site - 1] = 1;
  }
  return env;
}

// ---------------------------------------------------------------------------
// Coarse-graining of a square environment into K x K cells.

struct CellAnalysis {
  int cell_side = 0;    // K
  int cells_per_side = 0;
  double rho = 0.0;     // a cell is good iff it holds >= rho K^2 ones
  double zeta = 0.0;    // a row is good iff it holds >= zeta N/K good cells
  std::vector<std::uint8_t> good_cell;  // row-major, cells_per_side^2
  std::vector<std::uint8_t> good_row;   // cells_per_side
  double good_cell_fraction = 0.0;
  double good_row_fraction = 0.0;
};

inline CellAnalysis analyze_cells(const Environment& env, int cell_side,
                                  double rho, double zeta) {
  if (env.geometry != Geometry::square) {
    throw std::invalid_argument("analyze_cells: square geometry required");
  }
  if (cell_side < 1 || env.n % cell_side != 0) {
    throw std::invalid_argument("analyze_cells: cell side must divide n");
  }
  if (!(rho > 0.0) || !(zeta > 0.0)) {
    throw std::invalid_argument("analyze_cells: rho, zeta must be positive");
  }
  CellAnalysis out;
  out.cell_side = cell_side;
  out.cells_per_side = env.n / cell_side;
  out.rho = rho;
  out.zeta = zeta;
  const int c = out.cells_per_side;
  out.good_cell.assign(static_cast<std::size_t>(c) * c, 0);
  out.good_row.assign(static_cast<std::size_t>(c), 0);
  const double cell_threshold = rho * cell_side * cell_side;
  const double row_threshold = zeta * c;
  int good_cells = 0;
  int good_rows = 0;
  for (int cy = 0; cy < c; ++cy) {
    int good_in_row = 0;
    for (int cx = 0; cx < c; ++cx) {
      int ones = 0;
      for (int y = cy * cell_side + 1; y <= (cy + 1) * cell_side; ++y) {
        for (int x = cx * cell_side + 1; x <= (cx + 1) * cell_side; ++x) {
          ones += env.at(x, y);
        }
      }
      if (ones >= cell_threshold) {
        out.good_cell[static_cast<std::size_t>(cy) * c + cx] = 1;
        ++good_in_row;
        ++good_cells;
      }
    }
    if (good_in_row >= row_threshold) {
      out.good_row[cy] = 1;
      ++good_rows;
    }
  }
  out.good_cell_fraction = static_cast<double>(good_cells) / (c * c);
  out.good_row_fraction = static_cast<double>(good_rows) / c;
  return out;
}

// The pigeonhole counting behind the cell classification: whenever
// sum(omega) > delta |Lambda| and rho < delta/(2-delta), more than a
// rho/(1+rho) fraction of cells is good.
inline bool counting_bound_applies(double delta, double rho) {
  return delta > 0.0 && delta < 1.0 && rho > 0.0 &&
         rho < delta / (2.0 - delta);
}

// Row-level analogue; valid once 2*zeta/(1+zeta) <= rho/(1+rho), i.e.
// zeta <= rho/(2+rho).
inline bool row_counting_bound_applies(double rho, double zeta) {
  return rho > 0.0 && zeta > 0.0 && zeta <= rho / (2.0 + rho);
}

}  // namespace polypin
