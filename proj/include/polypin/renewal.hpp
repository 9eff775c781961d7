#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "polypin/environment.hpp"
#include "polypin/errors.hpp"
#include "polypin/walk.hpp"

namespace polypin {

// Polymer of length N over a segment environment, pinning strength eta.
// The Gibbs weight rewards every time i with X_i = 0 and omega_i = 1 by
// e^eta; expanding the product site by site turns the partition function
// into a renewal sum over pinned subsets with weight w = e^eta - 1 per
// pinned site and a return probability per gap.
struct PinningInstance {
  Environment env;  // segment geometry
  WalkKernel kernel;
  double eta = 0.0;

  double pin_weight() const { return std::expm1(eta); }
};

struct PinningSolution {
  int n = 0;
  int dimension = 1;
  double eta = 0.0;
  double w = 0.0;
  std::vector<int> sites;  // t_1 < ... < t_m

  // Forward renewal masses f_j (f_0 = 1 at the origin) and backward
  // tail sums B_j, stored in log form so values spanning thousands of
  // orders of magnitude stay exact.
  std::vector<double> log_f;  // size m+1
  std::vector<double> log_b;  // size m+1; log_b[0] unused

  std::vector<double> contact_probs;  // mu_j = P(X_{t_j} = 0), size m
  double log_z = 0.0;
  double expected_contacts = 0.0;
  double contact_fraction = 0.0;
};

struct SolveOptions {
  // Forward/backward values are rescaled by the newest entry whenever it
  // exceeds this threshold; the log ledger keeps results exact, and the
  // outcome is independent of the threshold choice.
  double rescale_threshold = 1e100;
};

inline PinningSolution solve(const PinningInstance& inst,
                             const ReturnProbTable& table,
                             const SolveOptions& opt = {}) {
  if (inst.env.geometry != Geometry::segment) {
    throw std::invalid_argument("solve: segment environment required");
  }
  if (inst.kernel.dimension != table.dimension) {
    throw std::invalid_argument("solve: kernel/table dimension mismatch");
  }
  if (table.max_time < inst.env.n) {
    throw std::invalid_argument("solve: return-probability table too short");
  }
  if (!(inst.eta >= 0.0)) {
    throw std::invalid_argument("solve: eta must be >= 0");
  }
  const double neg_inf = -std::numeric_limits<double>::infinity();

  PinningSolution sol;
  sol.n = inst.env.n;
  sol.dimension = inst.kernel.dimension;
  sol.eta = inst.eta;
  sol.w = inst.pin_weight();
  sol.sites = contact_sites(inst.env).t;
  const int m = static_cast<int>(sol.sites.size());
  sol.log_f.assign(m + 1, neg_inf);
  sol.log_b.assign(m + 1, 0.0);
  sol.log_f[0] = 0.0;
  sol.contact_probs.assign(m, 0.0);

  const auto& p = table.p;
  auto site = [&](int i) { return i == 0 ? 0 : sol.sites[i - 1]; };

  if (sol.w == 0.0 || m == 0) {
    // eta = 0: the measure is the reference walk itself, Z = 1, and the
    // contact probabilities reduce to plain return probabilities.
    sol.log_z = 0.0;
    sol.expected_contacts = 0.0;
    for (int j = 1; j <= m; ++j) {
      sol.contact_probs[j - 1] = p[site(j)];
      sol.expected_contacts += sol.contact_probs[j - 1];
    }
    sol.contact_fraction = sol.expected_contacts / sol.n;
    return sol;
  }

  const double w = sol.w;
  const double log_w = std::log(w);

  // Forward pass: f_j = w sum_{i<j} f_i p_{t_j - t_i}, in linear arithmetic
  // under a running scale. log_f is recorded at birth, before any later
  // rescale can underflow the stored linear value; entries that fall more
  // than ~250 orders of magnitude below the running scale contribute less
  // than 1e-240 relative to any later sum and may safely flush to zero.
  std::vector<double> fs(m + 1, 0.0);
  fs[0] = 1.0;
  double fscale = 0.0;  // true f = fs * e^{fscale}
  for (int j = 1; j <= m; ++j) {
    double s = 0.0;
    const int tj = site(j);
    for (int i = 0; i < j; ++i) s += fs[i] * p[tj - site(i)];
    const double v = w * s;
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw NumericalError("solve: forward pass lost positivity");
    }
    sol.log_f[j] = std::log(v) + fscale;
    fs[j] = v;
    if (v > opt.rescale_threshold) {
      for (int i = 0; i <= j; ++i) fs[i] /= v;
      fscale += std::log(v);
    }
  }
  double z_sum = 0.0;
  for (int j = 0; j <= m; ++j) z_sum += fs[j];
  sol.log_z = fscale + std::log(z_sum);

  // Backward pass: B_j = 1 + w sum_{k>j} p_{t_k - t_j} B_k, same scheme.
  // Once the scale has grown past 1 the unit term is negligible by the
  // same 250-orders argument; while the scale is ~1 it enters exactly.
  std::vector<double> bs(m + 1, 0.0);
  double bscale = 0.0;
  bs[m] = 1.0;
  sol.log_b[m] = 0.0;
  for (int j = m - 1; j >= 1; --j) {
    double t = 0.0;
    const int tj = site(j);
    for (int k = j + 1; k <= m; ++k) t += p[site(k) - tj] * bs[k];
    t *= w;
    const double unit = std::exp(-bscale);
    double v = t + unit;
    if (unit == 0.0) {
      // log(1 + t e^{bscale}) with the huge part factored out.
      sol.log_b[j] = std::log(t) + bscale;
    } else {
      sol.log_b[j] = std::log(v) + bscale;
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw NumericalError("solve: backward pass lost positivity");
    }
    bs[j] = v;
    if (v > opt.rescale_threshold) {
      for (int k = j; k <= m; ++k) bs[k] /= v;
      bscale += std::log(v);
    }
  }

  // mu_j = F_j e^eta B_j / Z with F_j = f_j / w.
  double expected = 0.0;
  for (int j = 1; j <= m; ++j) {
    const double log_mu =
        sol.log_f[j] - log_w + sol.eta + sol.log_b[j] - sol.log_z;
    double mu = std::exp(log_mu);
    if (!std::isfinite(mu) || mu > 1.0 + 1e-8) {
      throw NumericalError("solve: contact probability out of range");
    }
    mu = std::clamp(mu, 0.0, 1.0);
    sol.contact_probs[j - 1] = mu;
    expected += mu;
  }
  sol.expected_contacts = expected;
  sol.contact_fraction = expected / sol.n;
  if (!std::isfinite(sol.log_z)) {
    throw NumericalError("solve: non-finite log Z");
  }
  return sol;
}

inline double contact_fraction(const PinningSolution& sol) {
  return sol.contact_fraction;
}

// |log Z(eta_max) - trapezoid integral of E_eta[contacts] over [0, eta_max]|.
// The two sides agree identically in exact arithmetic; the residual decays
// like grid^{-2}.
inline double free_energy_integral_check(const Environment& env,
                                         const WalkKernel& kernel,
                                         double eta_max, int grid_points) {
  if (grid_points < 2) {
    throw std::invalid_argument("free_energy_integral_check: need >= 2 nodes");
  }
  if (!(eta_max >= 0.0)) {
    throw std::invalid_argument("free_energy_integral_check: eta_max < 0");
  }
  const ReturnProbTable table = return_probabilities(kernel, env.n);
  const double h = eta_max / (grid_points - 1);
  double integral = 0.0;
  double log_z_at_max = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double eta = h * i;
    PinningInstance inst{env, kernel, eta};
    const PinningSolution sol = solve(inst, table);
    const double weight = (i == 0 || i == grid_points - 1) ? 0.5 : 1.0;
    integral += weight * sol.expected_contacts;
    if (i == grid_points - 1) log_z_at_max = sol.log_z;
  }
  integral *= h;
  return std::abs(log_z_at_max - integral);
}

// Explicit lower bounds on log Z for an environment with m = r*K reward
// sites in {1..n}. The 1d bound combines the K^r tuple count with the
// geometric-mean gap estimate; the 2d bound goes through the periodized
// gap-product sum at its equal-spacing minimum. Both are valid for every
// omega satisfying the density hypothesis when c is a uniform local-CLT
// lower-bound constant for the walk (see min_local_clt_constant).
struct LogZLowerBounds {
  double dim1 = 0.0;
  double dim2 = 0.0;
};

inline LogZLowerBounds pinning_log_z_lower_bounds(double delta, double eta,
                                                  int n, int m, int r, int K,
                                                  double clt_c) {
  if (r < 1 || K < 1 || r * K != m) {
    throw std::invalid_argument(
        "pinning_log_z_lower_bounds: r must equal m / K exactly");
  }
  if (!(clt_c > 0.0)) {
    throw std::invalid_argument("pinning_log_z_lower_bounds: need c > 0");
  }
  if (!(delta >= 0.0 && delta < 1.0) || m <= delta * n) {
    throw std::invalid_argument(
        "pinning_log_z_lower_bounds: density hypothesis m > delta*n violated");
  }
  const double w = std::expm1(eta);
  LogZLowerBounds out;
  // (K c w sqrt(r/n))^r
  out.dim1 = r * (std::log(K * clt_c * w) +
                  0.5 * std::log(static_cast<double>(r) / n));
  // (c w)^r (log K)^{r-1} / (Delta^{r-1} (n+1)), Delta = (n+1)/m.
  const double gap = (n + 1.0) / m;
  if (r == 1) {
    out.dim2 = std::log(clt_c * w) - std::log(n + 1.0);
  } else {
    out.dim2 = r * std::log(clt_c * w) +
               (r - 1) * std::log(std::log(static_cast<double>(K))) -
               (r - 1) * std::log(gap) - std::log(n + 1.0);
  }
  return out;
}

}  // namespace polypin
