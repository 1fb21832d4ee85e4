#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hopca/selection.hpp"
#include "hopca/simulation.hpp"

namespace hopca {

/// Methods understood by the table experiment.
const std::vector<std::string>& table_methods();
/// Methods understood by the ROC experiment (sparse methods plus baselines).
const std::vector<std::string>& roc_methods();

struct ExperimentConfig {
  SimScenarioSpec scenario;  // seed and replicate fields are set per replicate
  std::vector<std::string> methods;
  int replicates = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::vector<double> grid;  // relative lambda fractions; empty for defaults
  SolverConfig solver;

  void validate() const;
};

/// Fits one method on x with K = truth rank. Sparse methods penalize the
/// truly sparse modes, using a BIC search over `grid` (the default BIC grid
/// when empty).
RecoveryMetrics run_method(const std::string& method, const SimTruth& truth,
                           const std::vector<double>& grid, const SolverConfig& cfg);

struct TableRow {
  std::string method;
  Index component = 0;  // 0-based true component
  int mode = 1;
  double tp_mean = 0.0, fp_mean = 0.0, tp_sd = 0.0, fp_sd = 0.0;
  double mse_mean = 0.0, mse_sd = 0.0;
  int replicates = 0;  // successful replicates
  int failed = 0;
};

struct ReplicateRecord {
  std::string method;
  int replicate = 0;
  bool ok = false;
  std::string error;
  double seconds = 0.0;
  RecoveryMetrics metrics;
};

struct TableResult {
  std::vector<TableRow> rows;  // one per method, true component and sparse mode
  std::vector<ReplicateRecord> records;
};

TableResult run_table_experiment(const ExperimentConfig& cfg);

struct RocRow {
  std::string method;
  std::size_t grid_index = 0;
  double lambda = 0.0;
  Index component = 0;
  int mode = 1;
  double tp = 0.0, fp = 0.0;  // replicate means
  int replicates = 0;
};

struct RocResult {
  std::vector<RocRow> rows;
  std::vector<ReplicateRecord> records;  // metrics unused; timing and failures
};

RocResult run_roc_experiment(const ExperimentConfig& cfg);

/// table.csv, metrics.csv (per replicate) and timings.csv.
void write_table_csv(const std::filesystem::path& dir, int scenario, const TableResult& res);
/// roc.csv and timings.csv.
void write_roc_csv(const std::filesystem::path& dir, int scenario, const RocResult& res);

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace hopca
