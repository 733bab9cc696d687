// tkmeans: transformed K-means experiment runner.
//
//   tkmeans run   --config exp.cfg [--data ... --labels ... --clusters 2..10 ...]
//   tkmeans trace --data ... --labels ... --clusters 2 --out trace.csv
//   tkmeans synth --clusters 3 --dim 10 --samples 300 --out-dir data/
//
// Exit codes: 0 success, 2 some trials failed, 1 fatal error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tkmeans/data_pipeline.hpp"
#include "tkmeans/errors.hpp"
#include "tkmeans/experiment.hpp"
#include "tkmeans/joint_solver.hpp"
#include "tkmeans/metrics.hpp"
#include "tkmeans/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::string> data, labels, clusters, normalize, scale, out;
  std::optional<int> trials, dim, threads, max_iters;
  std::optional<double> lambda, mu;
  std::optional<std::uint64_t> seed;
};

int do_run(const RunFlags& f) {
  tkm::ExperimentConfig config;
  if (!f.config.empty()) config = tkm::load_config(f.config);
  if (f.data) config.data_path = *f.data;
  if (f.labels) config.labels_path = *f.labels;
  if (f.clusters) std::tie(config.c_min, config.c_max) = tkm::parse_cluster_range(*f.clusters);
  if (f.normalize) config.normalize = tkm::parse_normalization(*f.normalize);
  if (f.scale) config.scale = tkm::parse_scaling(*f.scale);
  if (f.out) config.out_dir = *f.out;
  if (f.trials) config.trials = *f.trials;
  if (f.dim) config.dim = *f.dim;
  if (f.threads) config.threads = *f.threads;
  if (f.max_iters) config.solver.max_outer_iters = *f.max_iters;
  if (f.lambda) config.solver.lambda = *f.lambda;
  if (f.mu) config.solver.mu = *f.mu;
  if (f.seed) config.master_seed = *f.seed;
  config.validate();

  const tkm::ExperimentReport report = tkm::run_experiment(config);
  fs::create_directories(config.out_dir);
  tkm::emit_report(report, tkm::ReportFormat::Csv, config.out_dir / "report.csv");
  tkm::emit_report(report, tkm::ReportFormat::Markdown, config.out_dir / "report.md");
  tkm::write_atomic(config.out_dir / "timings.csv", tkm::render_timings(report));

  std::cout << tkm::render_report(report, tkm::ReportFormat::Markdown);
  for (const auto& row : report.rows) {
    if (!row.ok) {
      std::cerr << "trial failed (c=" << row.clusters << ", trial=" << row.trial
                << "): " << row.failure << '\n';
    }
  }
  return report.has_failures() ? 2 : 0;
}

struct TraceFlags {
  std::string data, labels, normalize = "tfidf", scale = "gram", out = "trace.csv";
  int clusters = 0, dim = 100, max_iters = 50;
  double lambda = 1.0, mu = 1.0, tol = 1e-6;
  std::uint64_t seed = 0;
};

int do_trace(const TraceFlags& f) {
  tkm::ExperimentConfig config;
  config.data_path = f.data;
  config.labels_path = f.labels;
  config.normalize = tkm::parse_normalization(f.normalize);
  config.dim = f.dim;
  config.master_seed = f.seed;
  const tkm::ReducedDataset data = tkm::prepare_dataset(config);

  tkm::JointHyperparams params;
  params.k = f.clusters > 0 ? f.clusters : data.class_count;
  params.lambda = f.lambda;
  params.mu = f.mu;
  params.max_outer_iters = f.max_iters;
  params.outer_tol = f.tol;
  params.seed = f.seed;
  const tkm::SolveResult result =
      tkm::solve(tkm::apply_scaling(data.X, tkm::parse_scaling(f.scale)), params);
  tkm::emit_trace(result.trace, f.out);

  const auto table = tkm::contingency(result.labels, data.labels, params.k, data.class_count);
  std::cout << "iterations " << result.trace.size() << (result.converged ? " (converged)" : "")
            << "\npurity " << tkm::purity(table);
  if (table.classes() >= 2) std::cout << "\nentropy " << tkm::entropy(table);
  std::cout << "\ntrace written to " << f.out << '\n';
  return 0;
}

struct SynthFlags {
  tkm::BlobSpec spec;
  std::string out_dir = "synthetic";
};

int do_synth(const SynthFlags& f) {
  const fs::path dir = f.out_dir;
  fs::create_directories(dir);
  const tkm::LabeledCorpus corpus = tkm::make_blob_corpus(f.spec);
  tkm::save_corpus(corpus, dir / "features.mtx", dir / "labels.txt");
  std::string cfg = "data = features.mtx\nlabels = labels.txt\nnormalize = none\n";
  cfg += "dim = " + std::to_string(f.spec.dim) + "\n";
  cfg += "clusters = 2.." + std::to_string(f.spec.clusters) + "\n";
  cfg += "trials = 3\nseed = " + std::to_string(f.spec.seed) + "\nout = results\n";
  tkm::write_atomic(dir / "experiment.cfg", cfg);
  std::cout << "wrote " << corpus.samples() << " samples x " << corpus.raw_dim()
            << " features to " << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transformed K-means clustering benchmark"};
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Run the cluster-sweep experiment");
  run_cmd->add_option("--config", run.config, "key=value config file");
  run_cmd->add_option("--data", run.data, "Matrix Market feature file");
  run_cmd->add_option("--labels", run.labels, "label file, one integer per line");
  run_cmd->add_option("--clusters", run.clusters, "cluster range, e.g. 2..10");
  run_cmd->add_option("--trials", run.trials, "trials per cluster count");
  run_cmd->add_option("--lambda", run.lambda, "transform regularization weight");
  run_cmd->add_option("--mu", run.mu, "clustering weight");
  run_cmd->add_option("--dim", run.dim, "reduced dimension (0 disables reduction)");
  run_cmd->add_option("--normalize", run.normalize, "none | tfidf");
  run_cmd->add_option("--scale", run.scale, "none | gram");
  run_cmd->add_option("--seed", run.seed, "master seed");
  run_cmd->add_option("--threads", run.threads, "parallel trials");
  run_cmd->add_option("--max-iters", run.max_iters, "outer iteration cap");
  run_cmd->add_option("--out", run.out, "output directory");

  TraceFlags trace;
  auto* trace_cmd = app.add_subcommand("trace", "Single solve; write the convergence trace");
  trace_cmd->add_option("--data", trace.data)->required();
  trace_cmd->add_option("--labels", trace.labels)->required();
  trace_cmd->add_option("--clusters", trace.clusters, "k (default: class count)");
  trace_cmd->add_option("--dim", trace.dim, "reduced dimension (0 disables reduction)");
  trace_cmd->add_option("--normalize", trace.normalize, "none | tfidf");
  trace_cmd->add_option("--scale", trace.scale, "none | gram");
  trace_cmd->add_option("--lambda", trace.lambda);
  trace_cmd->add_option("--mu", trace.mu);
  trace_cmd->add_option("--max-iters", trace.max_iters);
  trace_cmd->add_option("--tol", trace.tol, "relative objective change to stop at");
  trace_cmd->add_option("--seed", trace.seed);
  trace_cmd->add_option("--out", trace.out, "trace CSV path");

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic blob dataset");
  synth_cmd->add_option("--clusters", synth.spec.clusters);
  synth_cmd->add_option("--dim", synth.spec.dim);
  synth_cmd->add_option("--samples", synth.spec.samples);
  synth_cmd->add_option("--std", synth.spec.std_dev);
  synth_cmd->add_option("--separation", synth.spec.separation, "center distance / std");
  synth_cmd->add_option("--seed", synth.spec.seed);
  synth_cmd->add_option("--out-dir", synth.out_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(run);
    if (trace_cmd->parsed()) return do_trace(trace);
    if (synth_cmd->parsed()) return do_synth(synth);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
