#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "polypin/renewal.hpp"
#include "polypin/rng.hpp"
#include "polypin/walk.hpp"

namespace polypin {

// Exact sampling from the polymer measure: first the pinned contact set by
// backward decomposition of the renewal masses, then conditioned bridges
// between consecutive zeros, then an unconditioned tail.

struct Trajectory {
  int dimension = 1;
  std::vector<std::array<int, 2>> pos;  // X_0..X_N; second entry 0 in d=1
  std::vector<int> contact_set;         // pinned times, ascending
};

// Memo for off-origin point probabilities P0(X_j = x) of one coordinate.
class PointProbCache {
 public:
  double get(int j, int x) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(j)) << 32) |
        static_cast<std::uint32_t>(x);
    auto it = map_.find(key);
    if (it != map_.end()) return it->second;
    const double v = lazy_point_probability(j, x);
    map_.emplace(key, v);
    return v;
  }

 private:
  std::unordered_map<std::uint64_t, double> map_;
};

// Pinned set A drawn with probability w^{|A|} P0(X = 0 on A) / Z: the last
// element is t_j with probability f_j / Z (empty set via f_0), then each
// predecessor i < j with probability f_i p_{t_j - t_i} / (f_j / w).
inline std::vector<int> sample_contact_set(const PinningSolution& sol,
                                           const ReturnProbTable& table,
                                           SplitMix64& rng) {
  const int m = static_cast<int>(sol.sites.size());
  auto site = [&](int i) { return i == 0 ? 0 : sol.sites[i - 1]; };
  std::vector<double> weights(m + 1);
  for (int j = 0; j <= m; ++j) {
    weights[j] = std::exp(sol.log_f[j] - sol.log_z);
  }
  int j = static_cast<int>(sample_index(rng, weights));
  std::vector<int> picked;
  const double log_w = sol.w > 0.0 ? std::log(sol.w) : 0.0;
  while (j > 0) {
    picked.push_back(site(j));
    // Normalizing constant is f_j / w by the forward recursion.
    const double log_norm = sol.log_f[j] - log_w;
    std::vector<double> prev(j);
    for (int i = 0; i < j; ++i) {
      prev[i] =
          std::exp(sol.log_f[i] + table.log_p[site(j) - site(i)] - log_norm);
    }
    j = static_cast<int>(sample_index(rng, prev));
  }
  std::vector<int> out(picked.rbegin(), picked.rend());
  return out;
}

// One lazy coordinate conditioned to return to 0 after `length` steps.
// Sequential exact sampling: the step law is reweighted by the ratio of
// point probabilities for the remaining bridge.
inline std::vector<int> sample_bridge_coordinate(int length, SplitMix64& rng,
                                                 PointProbCache& cache) {
  if (length < 0) throw std::invalid_argument("sample_bridge_coordinate");
  std::vector<int> path(length + 1, 0);
  int cur = 0;
  static constexpr std::array<int, 3> steps = {0, 1, -1};
  static constexpr std::array<double, 3> step_prob = {0.5, 0.25, 0.25};
  for (int done = 0; done < length; ++done) {
    const int remaining = length - done;
    const double denom = cache.get(remaining, -cur);
    std::vector<double> probs(3);
    for (int s = 0; s < 3; ++s) {
      probs[s] =
          step_prob[s] * cache.get(remaining - 1, -cur - steps[s]) / denom;
    }
    const int s = static_cast<int>(sample_index(rng, probs));
    cur += steps[s];
    path[done + 1] = cur;
  }
  return path;  // ends at 0 because the last step is forced onto the target
}

// Full trajectory: bridges over the gaps of {0} union A, free tail after
// the last pinned time.
inline Trajectory sample_path_one(const PinningSolution& sol,
                                  const ReturnProbTable& table,
                                  SplitMix64& rng, PointProbCache& cache) {
  Trajectory traj;
  traj.dimension = sol.dimension;
  traj.contact_set = sample_contact_set(sol, table, rng);
  traj.pos.assign(sol.n + 1, {0, 0});
  int prev = 0;
  for (int pin : traj.contact_set) {
    const int len = pin - prev;
    for (int d = 0; d < sol.dimension; ++d) {
      const auto coord = sample_bridge_coordinate(len, rng, cache);
      for (int i = 1; i <= len; ++i) traj.pos[prev + i][d] = coord[i];
    }
    prev = pin;
  }
  for (int i = prev + 1; i <= sol.n; ++i) {
    for (int d = 0; d < sol.dimension; ++d) {
      traj.pos[i][d] = traj.pos[i - 1][d] + sample_lazy_step(rng);
    }
  }
  return traj;
}

struct PathSampleStats {
  int n_samples = 0;
  double mean_contacts = 0.0;
  double stddev_contacts = 0.0;   // per-sample standard deviation
  double stderr_contacts = 0.0;   // of the mean
  double empirical_contact_fraction = 0.0;
  std::vector<Trajectory> kept;   // first `keep` trajectories
};

inline int count_contacts(const Trajectory& traj, const Environment& env) {
  int contacts = 0;
  for (int i = 1; i <= env.n; ++i) {
    if (!env.at(i)) continue;
    if (traj.pos[i][0] == 0 && (traj.dimension == 1 || traj.pos[i][1] == 0)) {
      ++contacts;
    }
  }
  return contacts;
}

inline PathSampleStats sample_paths(const PinningSolution& sol,
                                    const Environment& env,
                                    const ReturnProbTable& table,
                                    int n_samples, SplitMix64& rng,
                                    int keep = 0) {
  if (n_samples < 1) throw std::invalid_argument("sample_paths: n_samples");
  PointProbCache cache;
  PathSampleStats stats;
  stats.n_samples = n_samples;
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    Trajectory traj = sample_path_one(sol, table, rng, cache);
    const int contacts = count_contacts(traj, env);
    sum += contacts;
    sum_sq += static_cast<double>(contacts) * contacts;
    if (s < keep) stats.kept.push_back(std::move(traj));
  }
  stats.mean_contacts = sum / n_samples;
  const double var =
      std::max(0.0, sum_sq / n_samples - stats.mean_contacts * stats.mean_contacts);
  stats.stddev_contacts = std::sqrt(var);
  stats.stderr_contacts = stats.stddev_contacts / std::sqrt(double(n_samples));
  stats.empirical_contact_fraction = stats.mean_contacts / sol.n;
  return stats;
}

}  // namespace polypin
