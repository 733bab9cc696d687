#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tkmeans/data_pipeline.hpp"
#include "tkmeans/joint_solver.hpp"

namespace tkm {

/// Cluster-sweep experiment. Plain-text config: one `key = value` per line,
/// '#' starts a comment. Keys and defaults:
///
///   data             (required) Matrix Market feature file
///   labels           (required) label file
///   normalize        tfidf       none | tfidf
///   scale            gram        none | gram (trace(X X^T) = d per trial)
///   dim              100         truncated-SVD target dimension; 0 = no reduction
///   clusters         2..10       c range, "a..b" or a single integer
///   trials           10          trials per c
///   lambda           1
///   mu               1
///   max_outer_iters  50
///   outer_tol        1e-6
///   init_restarts    20
///   inner_restarts   1
///   inner_max_iters  300
///   seed             0           master seed
///   threads          1
///   out              results     output directory
struct ExperimentConfig {
  std::filesystem::path data_path;
  std::filesystem::path labels_path;
  Normalization normalize = Normalization::Tfidf;
  Scaling scale = Scaling::Gram;
  int dim = 100;
  int c_min = 2;
  int c_max = 10;
  int trials = 10;
  JointHyperparams solver;  // k is overwritten per c
  std::filesystem::path out_dir = "results";
  std::uint64_t master_seed = 0;
  int threads = 1;

  void validate() const;
};

/// Applies one key=value setting; throws InvalidArgument on unknown keys or
/// unparsable values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Parses "a..b" or "a".
std::pair<int, int> parse_cluster_range(const std::string& text);

/// Seeds depend on (master, c, trial) only, so adding trials or widening the
/// c range never changes existing rows:
///   trial seed     = derive(derive(master, c), trial)
///   subset seed    = derive(trial seed, 0)
///   solver seed    = derive(trial seed, 1)
///   reduction seed = derive(master, 0x5eed)
std::uint64_t trial_seed(std::uint64_t master, int c, int trial);
std::uint64_t subset_seed(std::uint64_t master, int c, int trial);
std::uint64_t solver_seed(std::uint64_t master, int c, int trial);
std::uint64_t reduction_seed(std::uint64_t master);

struct TrialRow {
  int clusters = 0;
  int trial = 0;
  bool ok = false;
  std::string failure;  // empty when ok
  double purity = 0.0;
  double entropy = 0.0;
  int iterations = 0;
  int samples = 0;
  double seconds = 0.0;  // wall time; excluded from the deterministic outputs
};

struct Summary {
  int clusters = 0;
  int successes = 0;
  int failures = 0;
  double purity_mean = 0.0, purity_std = 0.0;
  double entropy_mean = 0.0, entropy_std = 0.0;
  double iterations_mean = 0.0;
  double seconds_mean = 0.0;
};

struct ExperimentReport {
  std::vector<TrialRow> rows;  // ordered by (c, trial)

  bool has_failures() const;
  /// Per-c mean and sample standard deviation over successful trials.
  std::vector<Summary> summaries() const;
};

/// Solve and score one class-subset problem; `scale` is applied to the
/// subset's X before solving.
TrialRow run_trial(const ReducedDataset& data, const JointHyperparams& solver, Scaling scale,
                   int c, int trial, std::uint64_t master_seed);

/// Runs the sweep on an already-prepared dataset.
ExperimentReport run_sweep(const ReducedDataset& data, const ExperimentConfig& config);

/// Loads, preprocesses and reduces the dataset, then runs the sweep. Dataset
/// failures throw; per-trial solver failures are recorded in their row.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Loads, preprocesses and reduces the dataset as configured.
ReducedDataset prepare_dataset(const ExperimentConfig& config);

enum class ReportFormat { Csv, Markdown };

/// Deterministic rendering (no wall times). CSV holds every trial row;
/// markdown holds one row per c with mean +/- std.
std::string render_report(const ExperimentReport& report, ReportFormat format);
/// Wall-time table, one row per trial.
std::string render_timings(const ExperimentReport& report);
void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path);
ExperimentReport parse_report_csv(const std::string& text);

std::string render_trace(const SolveTrace& trace);
void emit_trace(const SolveTrace& trace, const std::filesystem::path& path);
/// Reads back iteration, objective, fit_term, cluster_term and seconds.
SolveTrace parse_trace_csv(const std::string& text);

/// Writes to a sibling temporary file then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace tkm
