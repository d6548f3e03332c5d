#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "linearcl/forgetting.hpp"
#include "linearcl/metrics.hpp"

namespace linearcl {

struct GeneratorConfig {
  std::string name = "spectrum_controlled";
  int tasks = 3;
  int samples = 32;
  int dim = 16;
  double decay = 0.5;
  double degrees_per_task = 5.0;
  double loc_x = 0.0, scale_x = 1.0, loc_w = 0.0, scale_w = 1.0, noise_scale = 0.0;
  std::string path;     // csv ingestion
  int classes = 0;      // > 0 buckets labels into one-hot classes
  std::string map = "identity";
  int map_dim = 0;      // param_dim for non-identity maps; 0 means dim
  std::uint64_t map_seed = 0;
};

struct ExperimentConfig {
  GeneratorConfig generator;
  std::vector<Method> methods = {Method::sgd};
  std::vector<std::uint64_t> seeds = {0};
  double lambda = 1e-2;
  double lr = 1e-3;
  int max_iters = 200000;
  double grad_tol = 1e-10;
  int components = 2;     // d
  int pca_samples = 3000; // s
  std::vector<int> memories = {0};
  bool iterative_check = false;
  bool normalize_drift = false;
  bool refresh_gem_gradients = false;
  std::set<std::string> analyses = {"cf", "bounds", "metrics"};
  std::string pairs = "all";  // or from_first
  std::string out_dir = "out";

  Hyper hyper() const;
  std::string canonical() const;    // stable text form, hashed below
  std::string hash() const;         // 16 hex digits
  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

TaskSequence build_sequence(const GeneratorConfig& gen, std::uint64_t seed);
FeatureMap build_feature_map(const GeneratorConfig& gen, int input_dim);

struct MetricSummary {
  double average = 0.0;   // A_T
  double forgetting = 0.0;  // F_T (NaN for single-task runs)
};

struct CellResult {
  Method method = Method::sgd;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  EvalMatrix evals;
  std::vector<DriftRecord> records;
  std::vector<SpectrumRow> spectrum;
  std::optional<MetricSummary> metrics;
  double iterative_max_rel_error = 0.0;  // only when the cross-check ran
  std::vector<std::string> warnings;
  double wall_ms = 0.0;
};

// One cell per (method, seed); failures are isolated and recorded.
std::vector<CellResult> run_cells(const ExperimentConfig& config);

// Executes the grid and writes runs.csv, drift.csv, spectrum.csv,
// metrics.csv, failures.csv and meta.txt under config.out_dir.
void run_experiment(const ExperimentConfig& config);

// Joins runs.csv and drift.csv from a run directory into compare.csv; rejects
// mixed config hashes.
void compare_report(const std::string& dir);

// A_T / F_T per (method, seed) from a runs.csv file.
std::vector<std::pair<std::string, MetricSummary>> metrics_from_runs_csv(const std::string& path);

std::string format_double(double v);

}  // namespace linearcl
