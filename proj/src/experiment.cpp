#include "tkmeans/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "tkmeans/errors.hpp"
#include "tkmeans/metrics.hpp"
#include "tkmeans/random.hpp"

namespace tkm {
namespace fs = std::filesystem;

namespace {

std::string trim_copy(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::InvalidArgument, "bad value '" + text + "' for key '" + key + "'");
  }
  return value;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string csv_safe(std::string s) {
  for (char& ch : s) {
    if (ch == ',') ch = ';';
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (data_path.empty() || labels_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "data and labels paths are required");
  }
  if (c_min < 2 || c_max < c_min) {
    throw Error(ErrorCode::InvalidArgument, "cluster range must satisfy 2 <= c_min <= c_max");
  }
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (dim < 0) throw Error(ErrorCode::InvalidArgument, "dim must be >= 0");
  if (threads < 1) throw Error(ErrorCode::InvalidArgument, "threads must be >= 1");
  if (!(solver.lambda > 0.0) || !(solver.mu > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "lambda and mu must be positive");
  }
  if (solver.max_outer_iters < 1 || !(solver.outer_tol >= 0.0) || solver.init_restarts < 1 ||
      solver.inner_restarts < 1 || solver.inner_max_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "invalid solver iteration settings");
  }
}

std::pair<int, int> parse_cluster_range(const std::string& text) {
  const std::string t = trim_copy(text);
  const auto dots = t.find("..");
  if (dots == std::string::npos) {
    const int c = parse_value<int>("clusters", t);
    return {c, c};
  }
  return {parse_value<int>("clusters", trim_copy(t.substr(0, dots))),
          parse_value<int>("clusters", trim_copy(t.substr(dots + 2)))};
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value) {
  if (key == "data") {
    config.data_path = value;
  } else if (key == "labels") {
    config.labels_path = value;
  } else if (key == "normalize") {
    config.normalize = parse_normalization(value);
  } else if (key == "scale") {
    config.scale = parse_scaling(value);
  } else if (key == "dim") {
    config.dim = parse_value<int>(key, value);
  } else if (key == "clusters") {
    std::tie(config.c_min, config.c_max) = parse_cluster_range(value);
  } else if (key == "trials") {
    config.trials = parse_value<int>(key, value);
  } else if (key == "lambda") {
    config.solver.lambda = parse_value<double>(key, value);
  } else if (key == "mu") {
    config.solver.mu = parse_value<double>(key, value);
  } else if (key == "max_outer_iters") {
    config.solver.max_outer_iters = parse_value<int>(key, value);
  } else if (key == "outer_tol") {
    config.solver.outer_tol = parse_value<double>(key, value);
  } else if (key == "init_restarts") {
    config.solver.init_restarts = parse_value<int>(key, value);
  } else if (key == "inner_restarts") {
    config.solver.inner_restarts = parse_value<int>(key, value);
  } else if (key == "inner_max_iters") {
    config.solver.inner_max_iters = parse_value<int>(key, value);
  } else if (key == "seed") {
    config.master_seed = parse_value<std::uint64_t>(key, value);
  } else if (key == "threads") {
    config.threads = parse_value<int>(key, value);
  } else if (key == "out") {
    config.out_dir = value;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim_copy(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError,
                  "config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(config, trim_copy(line.substr(0, eq)), trim_copy(line.substr(eq + 1)));
  }
  return config;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig config = parse_config(buffer.str());
  // Relative dataset paths are resolved against the config file's directory.
  const fs::path base = path.parent_path();
  if (!config.data_path.empty() && config.data_path.is_relative()) {
    config.data_path = base / config.data_path;
  }
  if (!config.labels_path.empty() && config.labels_path.is_relative()) {
    config.labels_path = base / config.labels_path;
  }
  return config;
}

std::uint64_t trial_seed(std::uint64_t master, int c, int trial) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(c)),
                     static_cast<std::uint64_t>(trial));
}
std::uint64_t subset_seed(std::uint64_t master, int c, int trial) {
  return derive_seed(trial_seed(master, c, trial), 0);
}
std::uint64_t solver_seed(std::uint64_t master, int c, int trial) {
  return derive_seed(trial_seed(master, c, trial), 1);
}
std::uint64_t reduction_seed(std::uint64_t master) { return derive_seed(master, 0x5eed); }

bool ExperimentReport::has_failures() const {
  return std::any_of(rows.begin(), rows.end(), [](const TrialRow& r) { return !r.ok; });
}

std::vector<Summary> ExperimentReport::summaries() const {
  std::map<int, std::vector<const TrialRow*>> by_c;
  for (const auto& r : rows) by_c[r.clusters].push_back(&r);
  std::vector<Summary> out;
  for (const auto& [c, group] : by_c) {
    Summary s;
    s.clusters = c;
    std::vector<double> pur, ent, its, secs;
    for (const TrialRow* r : group) {
      if (!r->ok) {
        ++s.failures;
        continue;
      }
      ++s.successes;
      pur.push_back(r->purity);
      ent.push_back(r->entropy);
      its.push_back(r->iterations);
      secs.push_back(r->seconds);
    }
    std::tie(s.purity_mean, s.purity_std) = mean_std(pur);
    std::tie(s.entropy_mean, s.entropy_std) = mean_std(ent);
    s.iterations_mean = mean_std(its).first;
    s.seconds_mean = mean_std(secs).first;
    out.push_back(s);
  }
  return out;
}

TrialRow run_trial(const ReducedDataset& data, const JointHyperparams& solver, Scaling scale,
                   int c, int trial, std::uint64_t master_seed) {
  const auto start = std::chrono::steady_clock::now();
  TrialRow row;
  row.clusters = c;
  row.trial = trial;
  try {
    const ReducedDataset subset = subsample_classes(data, c, subset_seed(master_seed, c, trial));
    row.samples = static_cast<int>(subset.samples());
    JointHyperparams params = solver;
    params.k = c;
    params.seed = solver_seed(master_seed, c, trial);
    const SolveResult result = solve(apply_scaling(subset.X, scale), params);
    const ContingencyTable table = contingency(result.labels, subset.labels, c, c);
    row.purity = purity(table);
    row.entropy = entropy(table);
    row.iterations = static_cast<int>(result.trace.size());
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.failure = e.what();
  }
  row.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

ReducedDataset prepare_dataset(const ExperimentConfig& config) {
  const LabeledCorpus corpus =
      preprocess(load_corpus(config.data_path, config.labels_path), config.normalize);
  if (config.dim == 0) return as_dataset(corpus);
  return reduce_dims(corpus, config.dim, reduction_seed(config.master_seed));
}

ExperimentReport run_sweep(const ReducedDataset& data, const ExperimentConfig& config) {
  config.validate();
  struct Job {
    int c, trial;
  };
  std::vector<Job> jobs;
  for (int c = config.c_min; c <= config.c_max; ++c) {
    for (int t = 0; t < config.trials; ++t) jobs.push_back({c, t});
  }
  ExperimentReport report;
  report.rows.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      report.rows[i] = run_trial(data, config.solver, config.scale, jobs[i].c, jobs[i].trial,
                                 config.master_seed);
    }
  };
  const int workers = std::min<int>(config.threads, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  return run_sweep(prepare_dataset(config), config);
}

std::string render_report(const ExperimentReport& report, ReportFormat format) {
  if (report.rows.empty()) throw Error(ErrorCode::InvalidArgument, "empty report");
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    out << "clusters,trial,status,samples,purity,entropy,iterations,failure\n";
    for (const auto& r : report.rows) {
      out << r.clusters << ',' << r.trial << ',' << (r.ok ? "ok" : "failed") << ','
          << r.samples << ',' << fmt_double(r.purity) << ',' << fmt_double(r.entropy) << ','
          << r.iterations << ',' << csv_safe(r.failure) << '\n';
    }
    return out.str();
  }
  out << "| Clusters | Entropy (lower is better) | Purity (higher is better) | Trials | Failed |\n";
  out << "|---:|---:|---:|---:|---:|\n";
  for (const auto& s : report.summaries()) {
    out << "| " << s.clusters << " | ";
    if (s.successes > 0) {
      out << fmt_fixed(s.entropy_mean) << " ± " << fmt_fixed(s.entropy_std) << " | "
          << fmt_fixed(s.purity_mean) << " ± " << fmt_fixed(s.purity_std);
    } else {
      out << "n/a | n/a";
    }
    out << " | " << s.successes << " | " << s.failures << " |\n";
  }
  return out.str();
}

std::string render_timings(const ExperimentReport& report) {
  std::ostringstream out;
  out << "clusters,trial,iterations,seconds\n";
  for (const auto& r : report.rows) {
    out << r.clusters << ',' << r.trial << ',' << r.iterations << ',' << fmt_double(r.seconds)
        << '\n';
  }
  return out.str();
}

void write_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move output into place at " + path.string());
  }
}

void emit_report(const ExperimentReport& report, ReportFormat format, const fs::path& path) {
  write_atomic(path, render_report(report, format));
}

ExperimentReport parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("clusters,trial,status", 0) != 0) {
    throw Error(ErrorCode::ParseError, "report CSV header missing");
  }
  ExperimentReport report;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_csv_line(line);
    if (f.size() != 8) {
      throw Error(ErrorCode::ParseError, "report CSV line " + std::to_string(lineno));
    }
    TrialRow r;
    r.clusters = parse_value<int>("clusters", f[0]);
    r.trial = parse_value<int>("trial", f[1]);
    r.ok = f[2] == "ok";
    r.samples = parse_value<int>("samples", f[3]);
    r.purity = parse_value<double>("purity", f[4]);
    r.entropy = parse_value<double>("entropy", f[5]);
    r.iterations = parse_value<int>("iterations", f[6]);
    r.failure = f[7];
    report.rows.push_back(r);
  }
  return report;
}

std::string render_trace(const SolveTrace& trace) {
  if (trace.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  std::ostringstream out;
  out << "iteration,objective,fit_term,cluster_term,seconds\n";
  for (const auto& r : trace.records) {
    out << r.iteration << ',' << fmt_double(r.objective) << ',' << fmt_double(r.fit_term) << ','
        << fmt_double(r.cluster_term) << ',' << fmt_double(r.seconds) << '\n';
  }
  return out.str();
}

void emit_trace(const SolveTrace& trace, const fs::path& path) {
  write_atomic(path, render_trace(trace));
}

SolveTrace parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "iteration,objective,fit_term,cluster_term,seconds") {
    throw Error(ErrorCode::ParseError, "trace CSV header missing");
  }
  SolveTrace trace;
  while (std::getline(in, line)) {
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw Error(ErrorCode::ParseError, "trace CSV row: " + line);
    TraceRecord r;
    r.iteration = parse_value<int>("iteration", f[0]);
    r.objective = parse_value<double>("objective", f[1]);
    r.fit_term = parse_value<double>("fit_term", f[2]);
    r.cluster_term = parse_value<double>("cluster_term", f[3]);
    r.seconds = parse_value<double>("seconds", f[4]);
    trace.records.push_back(r);
  }
  return trace;
}

}  // namespace tkm
