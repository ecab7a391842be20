#pragma once

// Seeded, reproducible experiment harness: config parsing, kind-specific
// trial loops (threaded, order-independent reduction), deterministic CSV
// emission, aggregate statistics with verdicts, and exact pooling across
// reports.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latdisc/distribution.hpp"
#include "latdisc/lattice.hpp"

namespace latdisc {

inline constexpr const char* kVersion = "latdisc 0.1.0";

struct ExperimentConfig {
  std::string kind;  // tsparse-disc | llt | unit-disc | spanningness | mixing | threshold
  int m = 0;
  int t = 0;                 // t-sparse kinds
  long n = 0;                // single column count
  std::vector<long> n_grid;  // unit-disc / mixing grids (strictly increasing)
  long trials = 1;
  uint64_t seed = 0;
  std::string out_path;
  NormSpec norm;
  double constant_c = 1.0;           // threshold constant
  double subsample_fraction = 0.05;  // tsparse-disc DP cross-check fraction
  long budget = 30000;               // search / local-search evaluation budget
  long mc_samples = 20000;           // smoothed-mass Monte Carlo samples
  int workers = 1;
  std::optional<double> s_value;                  // threshold override
  std::optional<nlohmann::json> distribution;     // explicit distribution spec
};

// Parses and validates a config; throws std::invalid_argument with a
// "config: field: problem" message naming the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

// The column distribution an experiment samples from: the explicit
// "distribution" spec when present, else TSparse(m, t).
ColumnDistribution config_distribution(const ExperimentConfig& c);

struct ExperimentReport {
  ExperimentConfig config;
  std::string version = kVersion;
  std::string csv;             // deterministic: identical across reruns and worker counts
  nlohmann::json aggregates;   // counts, rates, standard errors, fits
  nlohmann::json verdicts;     // array of {name, pass, ...detail}
  double wall_seconds = 0.0;   // excluded from the determinism contract
};

ExperimentReport run_experiment(const ExperimentConfig& config);

// Report JSON; wall time is the only nondeterministic field and can be
// suppressed for byte-comparison.
nlohmann::json report_to_json(const ExperimentReport& r, bool include_wall = true);

// Merge reports of one kind into a pooled CSV keyed by (m, t, n); counts are
// added exactly, never averaged.  Throws on mixed kinds.
std::string summarize(const std::vector<nlohmann::json>& reports);

// Shortest round-trip decimal formatting (the CSV number contract).
std::string format_double(double v);

}  // namespace latdisc
