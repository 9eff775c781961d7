#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "polypin/environment.hpp"
#include "polypin/gff.hpp"
#include "polypin/renewal.hpp"
#include "polypin/sampling.hpp"
#include "polypin/walk.hpp"

namespace polypin {

// Shortest round-trip decimal representation of a double.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec <= 16; ++prec) {
      char probe[64];
      std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
      std::sscanf(probe, "%lf", &back);
      if (back == v) return probe;
    }
  }
  return buf;
}

inline std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

// CSV with a fixed header row; an optional leading comment line carries the
// generation time and is suppressed for byte-reproducible output.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header,
            bool with_timestamp)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    if (with_timestamp) out_ << "# generated " << iso_timestamp() << "\n";
    out_ << header << "\n";
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ",";
      out_ << fields[i];
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Environment JSON: {"geometry", "n", "seed"?, "rle"} with the bit field
// run-length encoded as alternating run lengths starting from a run of
// zeros (possibly empty).

inline std::vector<std::int64_t> rle_encode(
    const std::vector<std::uint8_t>& bits) {
  std::vector<std::int64_t> runs;
  std::uint8_t value = 0;
  std::int64_t run = 0;
  for (auto b : bits) {
    if (b == value) {
      ++run;
    } else {
      runs.push_back(run);
      value = b;
      run = 1;
    }
  }
  runs.push_back(run);
  return runs;
}

inline std::vector<std::uint8_t> rle_decode(
    const std::vector<std::int64_t>& runs, std::size_t expected) {
  std::vector<std::uint8_t> bits;
  bits.reserve(expected);
  std::uint8_t value = 0;
  for (auto run : runs) {
    if (run < 0) throw std::runtime_error("rle: negative run length");
    bits.insert(bits.end(), static_cast<std::size_t>(run), value);
    value ^= 1;
  }
  if (bits.size() != expected) {
    throw std::runtime_error("rle: decoded length mismatch");
  }
  return bits;
}

inline nlohmann::json environment_to_json(const Environment& env) {
  nlohmann::json j;
  j["geometry"] = env.geometry == Geometry::segment ? "segment" : "square";
  j["n"] = env.n;
  if (env.seed) j["seed"] = *env.seed;
  j["rle"] = rle_encode(env.bits);
  return j;
}

inline Environment environment_from_json(const nlohmann::json& j) {
  Environment env;
  const std::string geometry = j.at("geometry").get<std::string>();
  if (geometry == "segment") {
    env.geometry = Geometry::segment;
  } else if (geometry == "square") {
    env.geometry = Geometry::square;
  } else {
    throw std::runtime_error("environment: unknown geometry " + geometry);
  }
  env.n = j.at("n").get<int>();
  if (env.n < 1) throw std::runtime_error("environment: n must be >= 1");
  if (j.contains("seed")) env.seed = j.at("seed").get<std::uint64_t>();
  env.bits = rle_decode(j.at("rle").get<std::vector<std::int64_t>>(),
                        env.site_count());
  return env;
}

inline void save_environment(const Environment& env, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << environment_to_json(env).dump() << "\n";
}

inline Environment load_environment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open environment file: " + path);
  nlohmann::json j;
  in >> j;
  return environment_from_json(j);
}

inline void write_contact_sites_csv(const Environment& env,
                                    const std::string& path,
                                    bool with_timestamp) {
  CsvWriter csv(path, "index,t", with_timestamp);
  const auto sites = contact_sites(env);
  for (std::size_t i = 0; i < sites.t.size(); ++i) {
    csv.row({std::to_string(i + 1), std::to_string(sites.t[i])});
  }
}

inline void write_return_prob_csv(const ReturnProbTable& table,
                                  const std::string& path,
                                  bool with_timestamp) {
  CsvWriter csv(path, "k,p_k", with_timestamp);
  for (int k = 0; k <= table.max_time; ++k) {
    csv.row({std::to_string(k), format_double(table.p[k])});
  }
}

inline void write_solution_csv(const PinningSolution& sol,
                               const std::string& path, bool with_timestamp) {
  CsvWriter csv(path, "j,t_j,mu_j", with_timestamp);
  for (std::size_t j = 0; j < sol.sites.size(); ++j) {
    csv.row({std::to_string(j + 1), std::to_string(sol.sites[j]),
             format_double(sol.contact_probs[j])});
  }
}

inline nlohmann::json solution_summary_json(const PinningSolution& sol,
                                            double env_density) {
  nlohmann::json j;
  j["N"] = sol.n;
  j["eta"] = sol.eta;
  j["density"] = env_density;
  j["logZ"] = sol.log_z;
  j["expected_contacts"] = sol.expected_contacts;
  j["contact_fraction"] = sol.contact_fraction;
  return j;
}

inline void write_trajectory_csv(const Trajectory& traj,
                                 const std::string& path,
                                 bool with_timestamp) {
  CsvWriter csv(path, traj.dimension == 1 ? "i,X_i" : "i,X_i_1,X_i_2",
                with_timestamp);
  for (std::size_t i = 0; i < traj.pos.size(); ++i) {
    if (traj.dimension == 1) {
      csv.row({std::to_string(i), std::to_string(traj.pos[i][0])});
    } else {
      csv.row({std::to_string(i), std::to_string(traj.pos[i][0]),
               std::to_string(traj.pos[i][1])});
    }
  }
}

inline void write_contact_set_csv(const Trajectory& traj,
                                  const std::string& path,
                                  bool with_timestamp) {
  CsvWriter csv(path, "index,t", with_timestamp);
  for (std::size_t i = 0; i < traj.contact_set.size(); ++i) {
    csv.row({std::to_string(i + 1), std::to_string(traj.contact_set[i])});
  }
}

inline void write_heights_csv(const GffState& st, const std::string& path,
                              bool with_timestamp) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  if (with_timestamp) out << "# generated " << iso_timestamp() << "\n";
  for (int y = 1; y <= st.n; ++y) {
    for (int x = 1; x <= st.n; ++x) {
      if (x > 1) out << ",";
      out << format_double(st.at(x, y));
    }
    out << "\n";
  }
}

inline void write_pinned_mask_csv(const GffState& st, const std::string& path,
                                  bool with_timestamp) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  if (with_timestamp) out << "# generated " << iso_timestamp() << "\n";
  for (int y = 1; y <= st.n; ++y) {
    for (int x = 1; x <= st.n; ++x) {
      if (x > 1) out << ",";
      out << int(st.pinned[std::size_t(y - 1) * st.n + (x - 1)]);
    }
    out << "\n";
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace polypin
