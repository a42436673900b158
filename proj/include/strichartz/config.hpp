#pragma once

// Experiment configuration: JSON form, validation, and the hash that names
// every output file.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strichartz/error.hpp"
#include "strichartz/grid_sim.hpp"
#include "strichartz/report.hpp"
#include "strichartz/symbols.hpp"

namespace strichartz {

inline const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names = {"validate", "nlogn",       "sandwich",
                                                 "bilinear", "proposition", "contrast"};
  return names;
}

inline std::vector<int> powers_of_two(int lo, int hi) {
  std::vector<int> out;
  for (int n = lo; n <= hi; n *= 2) out.push_back(n);
  return out;
}

struct ExperimentConfig {
  Symbol P{{0.0, 0.0}, 1.0, "P"};
  Symbol P_prime{{4.0, 0.0}, 1.0, "P'"};
  double v = 0.25;  ///< per-coordinate walk increment variance

  std::vector<int> N_schedule = powers_of_two(16, 4096);         ///< eigen-based experiments
  std::vector<int> N_expectation = powers_of_two(64, 8192);      ///< expectation-based experiments
  std::vector<int> T_schedule = {0, 1, 2, 4, 8, 16, 32, 64};     ///< time windows
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8};
  int nmax = 4096;  ///< cap applied to N_schedule

  // Kernel engine.
  double kernel_tolerance = 1e-8;
  double sup_tolerance = 1e-6;
  double table_tolerance = 1e-9;
  double table_half_width = 48.0;
  int direct_cutoff = 8;

  // Workloads.
  int bilinear_trials = 64;
  int khinchine_trials = 10000;
  int khinchine_vectors = 5;
  int khinchine_N = 32;
  int lemma_pairs = 50;
  int lemma_T = 1;
  int lemma_samples_per_unit = 16;  ///< 8 leaves ~1.2% trapezoid change on refinement
  int l4_trials = 8;
  int endpoint_iters = 12;
  int invariant_N = 64;

  GridSpec crosscheck_grid{320.0, 2048};
  GridSpec lemma_grid{120.0, 512};
  GridSpec contrast_grid{120.0, 512};

  std::vector<std::string> experiments = {"validate", "nlogn", "sandwich"};
  std::string out_dir = "reports";
  int threads = 0;  ///< 0 = runtime default

  /// Throws ConfigError on the first violated constraint.
  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
    auto ascending = [](const auto& v) {
      return std::adjacent_find(v.begin(), v.end(), [](auto a, auto b) { return a >= b; }) == v.end();
    };
    if (!(v > 0.0)) fail("v must be positive");
    if (N_schedule.empty() || !ascending(N_schedule) || N_schedule.front() < 0) fail("N_schedule must be ascending, nonnegative, nonempty");
    if (!ascending(N_expectation) || (!N_expectation.empty() && N_expectation.front() < 0)) fail("N_expectation must be ascending and nonnegative");
    if (!N_expectation.empty() && N_expectation.back() > (1 << 16)) fail("N_expectation above 2^16");
    if (T_schedule.empty() || !ascending(T_schedule) || T_schedule.front() < 0) fail("T_schedule must be ascending, nonnegative, nonempty");
    if (seeds.empty()) fail("seeds must be nonempty");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) fail("seeds must be distinct");
    if (nmax < 0) fail("nmax must be nonnegative");
    if (2 * std::min(nmax, N_schedule.back()) + 1 > 8193) fail("matrix dimension 2N+1 capped at 8193");
    for (double t : {kernel_tolerance, sup_tolerance, table_tolerance, table_half_width})
      if (!(t > 0.0)) fail("tolerances and table half width must be positive");
    if (direct_cutoff < 0) fail("direct_cutoff must be nonnegative");
    for (int n : {bilinear_trials, khinchine_trials, khinchine_vectors, lemma_pairs, lemma_samples_per_unit,
                  l4_trials, endpoint_iters})
      if (n < 1) fail("workload counts must be positive");
    if (khinchine_trials < 2) fail("khinchine_trials must be at least 2");
    if (khinchine_N < 0 || lemma_T < 0 || invariant_N < 0) fail("sizes must be nonnegative");
    for (const GridSpec* g : {&crosscheck_grid, &lemma_grid, &contrast_grid})
      if (!(g->L > 0.0) || !is_power_of_two(g->n) || g->n < 4) fail("grid n must be a power of two and L positive");
    for (const auto& e : experiments)
      if (std::find(known_experiments().begin(), known_experiments().end(), e) == known_experiments().end())
        fail("unknown experiment '" + e + "'");
    if (threads < 0) fail("threads must be nonnegative");
  }

  /// N_schedule with the nmax cap applied.
  std::vector<int> eigen_schedule() const {
    std::vector<int> out;
    for (int n : N_schedule)
      if (n <= nmax) out.push_back(n);
    return out;
  }

  bool selected(const std::string& name) const {
    return std::find(experiments.begin(), experiments.end(), name) != experiments.end();
  }
};

namespace detail {

inline nlohmann::json grid_json(const GridSpec& g) { return {{"L", g.L}, {"n", g.n}}; }

inline GridSpec grid_from_json(const nlohmann::json& j) { return {j.at("L").get<double>(), j.at("n").get<int>()}; }

}  // namespace detail

/// Numerical content only; output location and thread count do not change
/// results and are excluded so that reruns hash identically.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json P, Pp;
  to_json(P, c.P);
  to_json(Pp, c.P_prime);
  return {{"P", P},
          {"P_prime", Pp},
          {"v", c.v},
          {"N_schedule", c.N_schedule},
          {"N_expectation", c.N_expectation},
          {"T_schedule", c.T_schedule},
          {"seeds", c.seeds},
          {"nmax", c.nmax},
          {"kernel_tolerance", c.kernel_tolerance},
          {"sup_tolerance", c.sup_tolerance},
          {"table_tolerance", c.table_tolerance},
          {"table_half_width", c.table_half_width},
          {"direct_cutoff", c.direct_cutoff},
          {"bilinear_trials", c.bilinear_trials},
          {"khinchine_trials", c.khinchine_trials},
          {"khinchine_vectors", c.khinchine_vectors},
          {"khinchine_N", c.khinchine_N},
          {"lemma_pairs", c.lemma_pairs},
          {"lemma_T", c.lemma_T},
          {"lemma_samples_per_unit", c.lemma_samples_per_unit},
          {"l4_trials", c.l4_trials},
          {"endpoint_iters", c.endpoint_iters},
          {"invariant_N", c.invariant_N},
          {"crosscheck_grid", detail::grid_json(c.crosscheck_grid)},
          {"lemma_grid", detail::grid_json(c.lemma_grid)},
          {"contrast_grid", detail::grid_json(c.contrast_grid)},
          {"experiments", c.experiments}};
}

/// Overlays the keys present in j onto c; unknown keys are rejected.
inline void merge_config(ExperimentConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "P") c.P = symbol_from_json(v);
      else if (k == "P_prime") c.P_prime = symbol_from_json(v);
      else if (k == "v") c.v = v.get<double>();
      else if (k == "N_schedule") c.N_schedule = v.get<std::vector<int>>();
      else if (k == "N_expectation") c.N_expectation = v.get<std::vector<int>>();
      else if (k == "T_schedule") c.T_schedule = v.get<std::vector<int>>();
      else if (k == "seeds") c.seeds = v.get<std::vector<std::uint64_t>>();
      else if (k == "nmax") c.nmax = v.get<int>();
      else if (k == "kernel_tolerance") c.kernel_tolerance = v.get<double>();
      else if (k == "sup_tolerance") c.sup_tolerance = v.get<double>();
      else if (k == "table_tolerance") c.table_tolerance = v.get<double>();
      else if (k == "table_half_width") c.table_half_width = v.get<double>();
      else if (k == "direct_cutoff") c.direct_cutoff = v.get<int>();
      else if (k == "bilinear_trials") c.bilinear_trials = v.get<int>();
      else if (k == "khinchine_trials") c.khinchine_trials = v.get<int>();
      else if (k == "khinchine_vectors") c.khinchine_vectors = v.get<int>();
      else if (k == "khinchine_N") c.khinchine_N = v.get<int>();
      else if (k == "lemma_pairs") c.lemma_pairs = v.get<int>();
      else if (k == "lemma_T") c.lemma_T = v.get<int>();
      else if (k == "lemma_samples_per_unit") c.lemma_samples_per_unit = v.get<int>();
      else if (k == "l4_trials") c.l4_trials = v.get<int>();
      else if (k == "endpoint_iters") c.endpoint_iters = v.get<int>();
      else if (k == "invariant_N") c.invariant_N = v.get<int>();
      else if (k == "crosscheck_grid") c.crosscheck_grid = detail::grid_from_json(v);
      else if (k == "lemma_grid") c.lemma_grid = detail::grid_from_json(v);
      else if (k == "contrast_grid") c.contrast_grid = detail::grid_from_json(v);
      else if (k == "experiments") c.experiments = v.get<std::vector<std::string>>();
      else if (k == "out_dir") c.out_dir = v.get<std::string>();
      else if (k == "threads") c.threads = v.get<int>();
      else throw ConfigError("config: unknown key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  merge_config(c, j);
  return c;
}

inline std::string config_hash(const ExperimentConfig& c) { return sha256_hex(to_json(c).dump()); }

}  // namespace strichartz
