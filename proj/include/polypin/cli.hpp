#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polypin/environment.hpp"
#include "polypin/errors.hpp"
#include "polypin/gap_sums.hpp"
#include "polypin/gff.hpp"
#include "polypin/io.hpp"
#include "polypin/renewal.hpp"
#include "polypin/sampling.hpp"
#include "polypin/verify.hpp"
#include "polypin/walk.hpp"

namespace polypin::cli {

// Exit codes: 0 success, 1 usage error, 2 numerical failure,
// 3 verification failure.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_numerical = 2;
inline constexpr int exit_verification = 3;

namespace detail {

inline std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

inline std::vector<int> parse_ints(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

inline Geometry parse_geometry(const std::string& s) {
  if (s == "segment") return Geometry::segment;
  if (s == "square") return Geometry::square;
  throw std::invalid_argument("unknown geometry: " + s);
}

inline Environment generate(const std::string& kind, int n, Geometry geometry,
                            double density_, int gap,
                            const std::vector<double>& profile,
                            std::uint64_t seed) {
  if (kind == "bernoulli") return gen_bernoulli(n, geometry, density_, seed);
  if (kind == "periodic") return gen_periodic(n, geometry, gap);
  if (kind == "block") {
    if (geometry != Geometry::segment) {
      throw std::invalid_argument("block environments are segment-only");
    }
    if (profile.size() != 3) {
      throw std::invalid_argument("block profile needs three densities");
    }
    return gen_block(n, profile[0], profile[1], profile[2], seed);
  }
  if (kind == "vanishing") {
    if (geometry != Geometry::segment) {
      throw std::invalid_argument("vanishing environments are segment-only");
    }
    return gen_vanishing(n);
  }
  throw std::invalid_argument("unknown environment kind: " + kind);
}

// Run tasks 0..count-1 on up to `threads` workers; results land in
// caller-owned slots so output order never depends on scheduling.
template <typename Fn>
inline void run_pool(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline int run(std::vector<std::string> args) {
  CLI::App app{"polypin: exact solver, sampler and verifier for polymer "
               "pinning on diluted reward fields"};
  app.require_subcommand(1);
  bool no_timestamp = false;
  app.add_flag("--no-timestamp", no_timestamp,
               "omit the generation-time comment from CSV outputs");

  int exit_code = exit_ok;

  // ---- gen-env ------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("gen-env", "generate an environment file");
    struct GenOpts {
      std::string kind, geometry = "segment", out, contacts_csv;
      int n = 0, gap = 1;
      double density_ = 0.5;
      std::string profile = "0.8,0,0.8";
      std::uint64_t seed = 0;
    };
    auto opts = std::make_shared<GenOpts>();
    cmd->add_option("--kind", opts->kind, "bernoulli|periodic|block|vanishing")
        ->required();
    cmd->add_option("--n", opts->n, "side length")->required();
    cmd->add_option("--geometry", opts->geometry, "segment|square");
    cmd->add_option("--density", opts->density_, "bernoulli density");
    cmd->add_option("--gap", opts->gap, "periodic gap");
    cmd->add_option("--profile", opts->profile, "block thirds densities a,b,c");
    cmd->add_option("--seed", opts->seed, "rng seed");
    cmd->add_option("--out", opts->out, "output JSON path")->required();
    cmd->add_option("--contacts-csv", opts->contacts_csv,
                    "also export contact sites as CSV");
    cmd->callback([&, opts] {
      const Environment env = detail::generate(
          opts->kind, opts->n, detail::parse_geometry(opts->geometry),
          opts->density_, opts->gap, detail::parse_doubles(opts->profile),
          opts->seed);
      save_environment(env, opts->out);
      if (!opts->contacts_csv.empty()) {
        write_contact_sites_csv(env, opts->contacts_csv, !no_timestamp);
      }
      std::cout << "wrote " << opts->out << " (density "
                << format_double(density(env)) << ")\n";
    });
  }

  // ---- ptable -------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("ptable", "export return probabilities");
    struct PtableOpts {
      int dim = 1, max_time = 1000;
      std::string out;
    };
    auto opts = std::make_shared<PtableOpts>();
    cmd->add_option("--dim", opts->dim, "walk dimension 1|2");
    cmd->add_option("--max-time", opts->max_time, "largest time");
    cmd->add_option("--out", opts->out, "output CSV path")->required();
    cmd->callback([&, opts] {
      const auto table =
          return_probabilities(make_lazy_walk(opts->dim), opts->max_time);
      write_return_prob_csv(table, opts->out, !no_timestamp);
      std::cout << "wrote " << opts->out << "\n";
    });
  }

  // ---- solve --------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("solve", "solve one pinning instance");
    struct SolveOpts_ {
      std::string env, out_csv, out_json;
      double eta = 1.0;
      int dim = 1;
    };
    auto opts = std::make_shared<SolveOpts_>();
    cmd->add_option("--env", opts->env, "environment JSON")->required();
    cmd->add_option("--eta", opts->eta, "pinning strength")->required();
    cmd->add_option("--dim", opts->dim, "walk dimension 1|2");
    cmd->add_option("--out-csv", opts->out_csv, "per-site contact CSV");
    cmd->add_option("--out-json", opts->out_json, "summary JSON");
    cmd->callback([&, opts] {
      const Environment env = load_environment(opts->env);
      const WalkKernel kernel = make_lazy_walk(opts->dim);
      const auto table = return_probabilities(kernel, env.n);
      const PinningSolution sol = solve({env, kernel, opts->eta}, table);
      if (!opts->out_csv.empty()) {
        write_solution_csv(sol, opts->out_csv, !no_timestamp);
      }
      const auto summary = solution_summary_json(sol, density(env));
      if (!opts->out_json.empty()) {
        std::ofstream out(opts->out_json);
        if (!out) throw std::runtime_error("cannot write " + opts->out_json);
        out << summary.dump(2) << "\n";
      } else {
        std::cout << summary.dump(2) << "\n";
      }
    });
  }

  // ---- sample -------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("sample", "draw exact polymer paths");
    struct SampleOpts {
      std::string env, traj_out, contacts_out, summary_out;
      double eta = 1.0;
      int dim = 1, samples = 1000;
      std::uint64_t seed = 0;
    };
    auto opts = std::make_shared<SampleOpts>();
    cmd->add_option("--env", opts->env, "environment JSON")->required();
    cmd->add_option("--eta", opts->eta, "pinning strength")->required();
    cmd->add_option("--dim", opts->dim, "walk dimension 1|2");
    cmd->add_option("--samples", opts->samples, "number of paths");
    cmd->add_option("--seed", opts->seed, "rng seed");
    cmd->add_option("--traj-out", opts->traj_out, "first trajectory CSV");
    cmd->add_option("--contacts-out", opts->contacts_out,
                    "first trajectory contact set CSV");
    cmd->add_option("--summary-out", opts->summary_out, "summary JSON");
    cmd->callback([&, opts] {
      const Environment env = load_environment(opts->env);
      const WalkKernel kernel = make_lazy_walk(opts->dim);
      const auto table = return_probabilities(kernel, env.n);
      const PinningSolution sol = solve({env, kernel, opts->eta}, table);
      SplitMix64 rng = substream(opts->seed, 0);
      const auto stats =
          sample_paths(sol, env, table, opts->samples, rng, /*keep=*/1);
      if (!opts->traj_out.empty()) {
        write_trajectory_csv(stats.kept.front(), opts->traj_out, !no_timestamp);
      }
      if (!opts->contacts_out.empty()) {
        write_contact_set_csv(stats.kept.front(), opts->contacts_out,
                              !no_timestamp);
      }
      nlohmann::json j;
      j["N"] = sol.n;
      j["eta"] = sol.eta;
      j["seed"] = opts->seed;
      j["samples"] = stats.n_samples;
      j["empirical_expected_contacts"] = stats.mean_contacts;
      j["empirical_stderr"] = stats.stderr_contacts;
      j["dp_expected_contacts"] = sol.expected_contacts;
      j["empirical_contact_fraction"] = stats.empirical_contact_fraction;
      if (!opts->summary_out.empty()) {
        std::ofstream out(opts->summary_out);
        if (!out) throw std::runtime_error("cannot write " + opts->summary_out);
        out << j.dump(2) << "\n";
      } else {
        std::cout << j.dump(2) << "\n";
      }
    });
  }

  // ---- sweep --------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "sweep", "contact-fraction tables over N and eta grids");
    struct SweepOpts {
      std::string family, n_list, eta_list, out, profile = "0.8,0,0.8";
      int dim = 1, replicas = 1, gap = 2, threads = 1;
      double density_ = 0.5;
      std::uint64_t seed = 0;
    };
    auto opts = std::make_shared<SweepOpts>();
    cmd->add_option("--env-family", opts->family,
                    "bernoulli|periodic|block|vanishing")
        ->required();
    cmd->add_option("--n-list", opts->n_list, "comma list of N")->required();
    cmd->add_option("--eta-list", opts->eta_list, "comma list of eta")
        ->required();
    cmd->add_option("--dim", opts->dim, "walk dimension 1|2");
    cmd->add_option("--replicas", opts->replicas, "environments per grid node");
    cmd->add_option("--seed", opts->seed, "master seed");
    cmd->add_option("--density", opts->density_, "bernoulli density");
    cmd->add_option("--gap", opts->gap, "periodic gap");
    cmd->add_option("--profile", opts->profile, "block profile");
    cmd->add_option("--threads", opts->threads, "worker pool size");
    cmd->add_option("--out", opts->out, "output CSV")->required();
    cmd->callback([&, opts] {
      const auto ns = detail::parse_ints(opts->n_list);
      const auto etas = detail::parse_doubles(opts->eta_list);
      if (ns.empty() || etas.empty()) {
        throw std::invalid_argument("sweep: empty n-list or eta-list");
      }
      if (opts->replicas < 1) {
        throw std::invalid_argument("sweep: replicas must be >= 1");
      }
      const auto profile = detail::parse_doubles(opts->profile);
      struct Row {
        int n;
        double eta;
        std::uint64_t seed;
        double density_, log_z, expected, fraction;
      };
      struct Task {
        int n, replica;
        double eta;
      };
      std::vector<Task> tasks;
      for (int n : ns) {
        for (double eta : etas) {
          for (int rep = 0; rep < opts->replicas; ++rep) {
            tasks.push_back({n, rep, eta});
          }
        }
      }
      std::vector<Row> rows(tasks.size());
      const WalkKernel kernel = make_lazy_walk(opts->dim);
      detail::run_pool(
          static_cast<int>(tasks.size()), opts->threads, [&](int i) {
            const Task& task = tasks[i];
            const std::uint64_t env_seed =
                mix64(mix64(opts->seed) ^ mix64(task.n) ^
                      mix64(0xACEDull + task.replica));
            const Environment env =
                detail::generate(opts->family, task.n, Geometry::segment,
                                 opts->density_, opts->gap, profile, env_seed);
            const auto table = return_probabilities(kernel, task.n);
            const auto sol = solve({env, kernel, task.eta}, table);
            rows[i] = {task.n,          task.eta,
                       env_seed,        density(env),
                       sol.log_z,       sol.expected_contacts,
                       sol.contact_fraction};
          });
      CsvWriter csv(opts->out,
                    "family,N,eta,seed,density,logZ,expected_contacts,"
                    "contact_fraction",
                    !no_timestamp);
      for (const auto& row : rows) {
        csv.row({opts->family, std::to_string(row.n), format_double(row.eta),
                 std::to_string(row.seed), format_double(row.density_),
                 format_double(row.log_z), format_double(row.expected),
                 format_double(row.fraction)});
      }
      std::cout << "wrote " << opts->out << " (" << rows.size() << " rows)\n";
    });
  }

  // ---- psi ----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "psi", "gap-product sums: minima and closed-form bounds");
    struct PsiOpts {
      std::string m_list = "6", r_list = "3", k_list = "2", out;
      double budget = 0.0, tolerance = 1e-6;
      std::uint64_t seed = 0;
    };
    auto opts = std::make_shared<PsiOpts>();
    cmd->add_option("--m-list", opts->m_list, "comma list of m");
    cmd->add_option("--r-list", opts->r_list, "comma list of r");
    cmd->add_option("--k-list", opts->k_list, "comma list of K");
    cmd->add_option("--budget", opts->budget,
                    "cycle length (default m + 1 per row)");
    cmd->add_option("--tolerance", opts->tolerance, "minimizer tolerance");
    cmd->add_option("--seed", opts->seed, "rng seed");
    cmd->add_option("--out", opts->out, "output CSV")->required();
    cmd->callback([&, opts] {
      CsvWriter csv(opts->out,
                    "m,r,K,psi_uniform,lower_bound,min_found,"
                    "distance_to_uniform",
                    !no_timestamp);
      SplitMix64 rng = substream(opts->seed, 7);
      for (int m : detail::parse_ints(opts->m_list)) {
        if (m > 12) throw std::invalid_argument("psi: need m <= 12");
        for (int r : detail::parse_ints(opts->r_list)) {
          if (r < 1 || r > m) continue;
          const double budget = opts->budget > 0.0 ? opts->budget : m + 1.0;
          const double uniform_value =
              gap_product_sum_periodic(uniform_gaps(m, budget), r);
          const auto min_res =
              minimize_periodic_sum(m, r, budget, opts->tolerance, rng);
          for (int K : detail::parse_ints(opts->k_list)) {
            std::string bound = "nan";
            if (K >= 2 && 1 + (r - 1) * K <= m) {
              bound = format_double(
                  periodic_uniform_lower_bound(m, r, K, budget));
            }
            csv.row({std::to_string(m), std::to_string(r), std::to_string(K),
                     format_double(uniform_value), bound,
                     format_double(min_res.value),
                     format_double(min_res.max_deviation_from_uniform)});
          }
        }
      }
      std::cout << "wrote " << opts->out << "\n";
    });
  }

  // ---- gff ----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "gff", "pinned Gaussian interface: Gibbs sampling and exports");
    struct GffOpts {
      std::string env, heights_out, mask_out, summary_out;
      int n = 8, sweeps = 20000, burnin = 2000;
      double eta = 1.0, density_ = 1.0;
      std::uint64_t seed = 0, env_seed = 0;
    };
    auto opts = std::make_shared<GffOpts>();
    cmd->add_option("--env", opts->env, "square environment JSON");
    cmd->add_option("--n", opts->n, "side length (when no --env)");
    cmd->add_option("--density", opts->density_,
                    "bernoulli density (when no --env)");
    cmd->add_option("--env-seed", opts->env_seed, "environment seed");
    cmd->add_option("--eta", opts->eta, "pinning strength")->required();
    cmd->add_option("--sweeps", opts->sweeps, "total Gibbs sweeps");
    cmd->add_option("--burnin", opts->burnin, "discarded sweeps");
    cmd->add_option("--seed", opts->seed, "sampler seed");
    cmd->add_option("--heights-out", opts->heights_out, "height field CSV");
    cmd->add_option("--mask-out", opts->mask_out, "pinned mask CSV");
    cmd->add_option("--summary-out", opts->summary_out, "summary JSON");
    cmd->callback([&, opts] {
      Environment env =
          opts->env.empty()
              ? gen_bernoulli(opts->n, Geometry::square, opts->density_,
                              opts->env_seed)
              : load_environment(opts->env);
      if (env.geometry != Geometry::square) {
        throw std::invalid_argument("gff: square environment required");
      }
      GffInstance inst{std::move(env), opts->eta};
      SplitMix64 rng = substream(opts->seed, 13);
      const auto est =
          pinned_fraction_estimate(inst, opts->sweeps, opts->burnin, rng);
      if (!opts->heights_out.empty() || !opts->mask_out.empty()) {
        SplitMix64 rng2 = substream(opts->seed, 14);
        GffState st = make_initial_state(inst);
        for (int s = 0; s < opts->burnin + 100; ++s) {
          gibbs_sweep(inst, st, rng2);
        }
        if (!opts->heights_out.empty()) {
          write_heights_csv(st, opts->heights_out, !no_timestamp);
        }
        if (!opts->mask_out.empty()) {
          write_pinned_mask_csv(st, opts->mask_out, !no_timestamp);
        }
      }
      nlohmann::json j;
      j["N"] = inst.n();
      j["eta"] = inst.eta;
      j["pinned_fraction"] = est.mean;
      j["stderr"] = est.stderr_;
      if (!opts->summary_out.empty()) {
        std::ofstream out(opts->summary_out);
        if (!out) throw std::runtime_error("cannot write " + opts->summary_out);
        out << j.dump(2) << "\n";
      } else {
        std::cout << j.dump(2) << "\n";
      }
    });
  }

  // ---- verify -------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("verify", "run a property suite");
    struct VerifyOpts {
      std::string suite, out;
    };
    auto opts = std::make_shared<VerifyOpts>();
    cmd->add_option("--suite", opts->suite,
                    "dp-oracle|identity|psi|gff|cells")
        ->required();
    cmd->add_option("--out", opts->out, "JSON report path");
    cmd->callback([&, opts] {
      VerifyResult result;
      if (opts->suite == "dp-oracle") {
        result = verify_dp_oracle();
      } else if (opts->suite == "identity") {
        result = verify_identity();
      } else if (opts->suite == "psi") {
        result = verify_psi();
      } else if (opts->suite == "gff") {
        result = verify_gff();
      } else if (opts->suite == "cells") {
        result = verify_cells();
      } else {
        throw std::invalid_argument("unknown suite: " + opts->suite);
      }
      std::cout << "suite " << result.suite << ": "
                << (result.passed ? "PASS" : "FAIL") << "\n";
      for (const auto& line : result.lines) std::cout << line << "\n";
      if (!opts->out.empty()) {
        nlohmann::json j;
        j["suite"] = result.suite;
        j["passed"] = result.passed;
        j["checks"] = result.lines;
        std::ofstream out(opts->out);
        if (!out) throw std::runtime_error("cannot write " + opts->out);
        out << j.dump(2) << "\n";
      }
      if (!result.passed) exit_code = exit_verification;
    });
  }

  std::vector<const char*> argv;
  argv.push_back("polypin");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_code;
}

}  // namespace polypin::cli
