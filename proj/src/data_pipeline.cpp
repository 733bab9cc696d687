#include "tkmeans/data_pipeline.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "tkmeans/errors.hpp"
#include "tkmeans/random.hpp"

namespace tkm {
namespace fs = std::filesystem;

void LabeledCorpus::validate() const {
  if (labels.size() != static_cast<std::size_t>(features.rows())) {
    throw Error(ErrorCode::ShapeMismatch,
                std::to_string(features.rows()) + " feature rows but " +
                    std::to_string(labels.size()) + " labels");
  }
  for (int l : labels) {
    if (l < 0 || l >= class_count) {
      throw Error(ErrorCode::OutOfRange, "label " + std::to_string(l) + " outside class range");
    }
  }
}

Normalization parse_normalization(const std::string& text) {
  if (text == "none") return Normalization::None;
  if (text == "tfidf") return Normalization::Tfidf;
  throw Error(ErrorCode::InvalidArgument, "unknown normalization '" + text + "'");
}

std::string to_string(Normalization mode) {
  return mode == Normalization::Tfidf ? "tfidf" : "none";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void parse_fail(const fs::path& path, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view token, const fs::path& path, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    parse_fail(path, line, "cannot parse '" + std::string(token) + "'");
  }
  return value;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

SparseMatrix read_matrix_market(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  bool pattern = false;
  bool have_header = false;
  long long rows = 0, cols = 0, nnz = 0;
  std::vector<Eigen::Triplet<double>> triplets;
  std::set<std::pair<long long, long long>> seen;

  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) parse_fail(path, lineno, "blank line");
    if (!have_header && view.front() == '%') {
      if (view.starts_with("%%MatrixMarket")) {
        std::string lower(view);
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (lower.find("coordinate") == std::string::npos) {
          parse_fail(path, lineno, "only coordinate format is supported");
        }
        pattern = lower.find("pattern") != std::string::npos;
      }
      continue;
    }
    const auto tokens = split_ws(view);
    if (!have_header) {
      if (tokens.size() != 3) parse_fail(path, lineno, "expected 'rows cols nnz' header");
      rows = parse_number<long long>(tokens[0], path, lineno);
      cols = parse_number<long long>(tokens[1], path, lineno);
      nnz = parse_number<long long>(tokens[2], path, lineno);
      if (rows < 0 || cols < 0 || nnz < 0) parse_fail(path, lineno, "negative header value");
      have_header = true;
      triplets.reserve(static_cast<std::size_t>(nnz));
      continue;
    }
    const std::size_t expected = pattern ? 2 : 3;
    if (tokens.size() != expected) {
      parse_fail(path, lineno, "expected " + std::to_string(expected) + " fields");
    }
    const auto r = parse_number<long long>(tokens[0], path, lineno);
    const auto c = parse_number<long long>(tokens[1], path, lineno);
    const double v = pattern ? 1.0 : parse_number<double>(tokens[2], path, lineno);
    if (r < 1 || r > rows || c < 1 || c > cols) parse_fail(path, lineno, "index out of range");
    if (!std::isfinite(v) || v < 0.0) parse_fail(path, lineno, "value must be finite and >= 0");
    if (!seen.emplace(r, c).second) parse_fail(path, lineno, "duplicate entry");
    if (static_cast<long long>(triplets.size()) == nnz) {
      parse_fail(path, lineno, "more entries than declared");
    }
    triplets.emplace_back(static_cast<int>(r - 1), static_cast<int>(c - 1), v);
  }
  if (!have_header) parse_fail(path, lineno, "missing header");
  if (static_cast<long long>(triplets.size()) != nnz) {
    throw Error(ErrorCode::ShapeMismatch, path.string() + ": declared " + std::to_string(nnz) +
                                              " entries, found " +
                                              std::to_string(triplets.size()));
  }
  SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

void write_matrix_market(const fs::path& path, const SparseMatrix& m) {
  std::ofstream out = open_output(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_double(it.value()) << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::vector<int> read_labels(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) parse_fail(path, lineno, "blank line");
    const int label = parse_number<int>(view, path, lineno);
    if (label < 0) parse_fail(path, lineno, "labels must be zero-based nonnegative integers");
    labels.push_back(label);
  }
  return labels;
}

void write_labels(const fs::path& path, const std::vector<int>& labels) {
  std::ofstream out = open_output(path);
  for (int l : labels) out << l << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

LabeledCorpus load_corpus(const fs::path& features_path, const fs::path& labels_path) {
  LabeledCorpus corpus;
  corpus.features = read_matrix_market(features_path);
  corpus.labels = read_labels(labels_path);
  if (corpus.labels.size() != static_cast<std::size_t>(corpus.features.rows())) {
    throw Error(ErrorCode::ShapeMismatch,
                features_path.string() + " has " + std::to_string(corpus.features.rows()) +
                    " samples but " + labels_path.string() + " has " +
                    std::to_string(corpus.labels.size()) + " labels");
  }
  corpus.class_count =
      corpus.labels.empty() ? 0 : *std::max_element(corpus.labels.begin(), corpus.labels.end()) + 1;
  return corpus;
}

void save_corpus(const LabeledCorpus& corpus, const fs::path& features_path,
                 const fs::path& labels_path) {
  corpus.validate();
  write_matrix_market(features_path, corpus.features);
  write_labels(labels_path, corpus.labels);
}

namespace {

LabeledCorpus select_rows(const LabeledCorpus& corpus, const std::vector<Eigen::Index>& keep) {
  std::vector<Eigen::Triplet<double>> triplets;
  LabeledCorpus out;
  out.class_count = corpus.class_count;
  out.labels.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (SparseMatrix::InnerIterator it(corpus.features, keep[i]); it; ++it) {
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), it.value());
    }
    out.labels.push_back(corpus.labels[static_cast<std::size_t>(keep[i])]);
  }
  out.features.resize(static_cast<Eigen::Index>(keep.size()), corpus.features.cols());
  out.features.setFromTriplets(triplets.begin(), triplets.end());
  out.features.makeCompressed();
  return out;
}

bool row_is_empty(const SparseMatrix& m, Eigen::Index r) {
  for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
    if (it.value() != 0.0) return false;
  }
  return true;
}

}  // namespace

LabeledCorpus drop_empty_documents(const LabeledCorpus& corpus,
                                   std::vector<Eigen::Index>* dropped) {
  corpus.validate();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < corpus.samples(); ++r) {
    if (row_is_empty(corpus.features, r)) {
      if (dropped) dropped->push_back(r);
    } else {
      keep.push_back(r);
    }
  }
  return select_rows(corpus, keep);
}

LabeledCorpus tfidf_normalize(const LabeledCorpus& corpus) {
  corpus.validate();
  const Eigen::Index n = corpus.samples();
  std::vector<double> df(static_cast<std::size_t>(corpus.raw_dim()), 0.0);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (row_is_empty(corpus.features, r)) {
      throw Error(ErrorCode::EmptyDocument, "sample row " + std::to_string(r) + " is all zero");
    }
    for (SparseMatrix::InnerIterator it(corpus.features, r); it; ++it) {
      if (it.value() < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "term counts must be nonnegative");
      }
      if (it.value() > 0.0) df[static_cast<std::size_t>(it.col())] += 1.0;
    }
  }
  LabeledCorpus out = corpus;
  const double big_n = static_cast<double>(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double norm2 = 0.0;
    for (SparseMatrix::InnerIterator it(out.features, r); it; ++it) {
      const double idf = std::log((1.0 + big_n) / (1.0 + df[static_cast<std::size_t>(it.col())])) + 1.0;
      it.valueRef() *= idf;
      norm2 += it.value() * it.value();
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (SparseMatrix::InnerIterator it(out.features, r); it; ++it) it.valueRef() *= inv;
  }
  return out;
}

LabeledCorpus preprocess(const LabeledCorpus& corpus, Normalization mode) {
  std::vector<Eigen::Index> dropped;
  LabeledCorpus kept = drop_empty_documents(corpus, &dropped);
  if (!dropped.empty()) {
    std::cerr << "warning: dropped " << dropped.size() << " empty document(s); first at row "
              << dropped.front() << '\n';
  }
  return mode == Normalization::Tfidf ? tfidf_normalize(kept) : kept;
}

namespace {

Matrix orthonormal_basis(const Matrix& Y) {
  Eigen::HouseholderQR<Matrix> qr(Y);
  return qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
}

}  // namespace

ReducedDataset reduce_dims(const LabeledCorpus& corpus, int dim, std::uint64_t seed) {
  corpus.validate();
  const Eigen::Index n = corpus.samples();
  const Eigen::Index raw = corpus.raw_dim();
  const Eigen::Index rank_cap = std::min(n, raw);
  if (dim < 1 || dim > rank_cap) {
    throw Error(ErrorCode::OutOfRange, "target dimension " + std::to_string(dim) +
                                           " outside [1, " + std::to_string(rank_cap) + "]");
  }
  constexpr Eigen::Index kOversample = 10;
  constexpr Eigen::Index kExactCap = 1000;
  constexpr int kPowerIters = 4;
  const Eigen::Index width =
      rank_cap <= kExactCap ? rank_cap : std::min<Eigen::Index>(dim + kOversample, rank_cap);
  const SparseMatrix& A = corpus.features;

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix omega(raw, width);
  for (Eigen::Index c = 0; c < width; ++c) {
    for (Eigen::Index r = 0; r < raw; ++r) omega(r, c) = gauss(rng);
  }

  Matrix Q = orthonormal_basis(A * omega);
  for (int p = 0; p < kPowerIters; ++p) {
    Matrix W = orthonormal_basis(A.transpose() * Q);
    Q = orthonormal_basis(A * W);
  }

  // B^T = A^T Q is D x width; its thin SVD gives A ~ Q B = (Q V_b) S U_b^T.
  const Matrix Bt = A.transpose() * Q;
  Eigen::BDCSVD<Matrix> svd(Bt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix loadings = svd.matrixU().leftCols(dim);   // D x dim
  Matrix left = Q * svd.matrixV().leftCols(dim);   // n x dim
  const Vector sigma = svd.singularValues().head(dim);

  for (Eigen::Index c = 0; c < dim; ++c) {
    Eigen::Index arg = 0;
    loadings.col(c).cwiseAbs().maxCoeff(&arg);
    if (loadings(arg, c) < 0.0) {
      loadings.col(c) *= -1.0;
      left.col(c) *= -1.0;
    }
  }

  ReducedDataset out;
  out.X = (left * sigma.asDiagonal()).transpose();
  if (!out.X.allFinite()) {
    throw Error(ErrorCode::NumericalBreakdown, "reduction produced non-finite values");
  }
  out.labels = corpus.labels;
  out.class_count = corpus.class_count;
  out.reduction_meta = {"truncated_svd", dim, seed};
  return out;
}

Scaling parse_scaling(const std::string& text) {
  if (text == "none") return Scaling::None;
  if (text == "gram") return Scaling::Gram;
  throw Error(ErrorCode::InvalidArgument, "unknown scaling '" + text + "'");
}

std::string to_string(Scaling mode) { return mode == Scaling::Gram ? "gram" : "none"; }

DataMatrix scale_to_unit_gram(const DataMatrix& X) {
  const double energy = X.squaredNorm();
  if (energy == 0.0) return X;
  if (!std::isfinite(energy)) {
    throw Error(ErrorCode::NumericalBreakdown, "data energy is not finite");
  }
  return X * std::sqrt(static_cast<double>(X.rows()) / energy);
}

DataMatrix apply_scaling(const DataMatrix& X, Scaling mode) {
  return mode == Scaling::Gram ? scale_to_unit_gram(X) : X;
}

ReducedDataset as_dataset(const LabeledCorpus& corpus) {
  corpus.validate();
  ReducedDataset out;
  out.X = Matrix(corpus.features).transpose();
  out.labels = corpus.labels;
  out.class_count = corpus.class_count;
  out.reduction_meta = {"none", static_cast<int>(corpus.raw_dim()), 0};
  return out;
}

std::vector<int> choose_classes(const std::vector<int>& labels, int class_count, int c,
                                std::uint64_t seed) {
  std::vector<char> present(static_cast<std::size_t>(std::max(class_count, 0)), 0);
  for (int l : labels) {
    if (l < 0 || l >= class_count) throw Error(ErrorCode::OutOfRange, "label outside class range");
    present[static_cast<std::size_t>(l)] = 1;
  }
  std::vector<int> available;
  for (int l = 0; l < class_count; ++l) {
    if (present[static_cast<std::size_t>(l)]) available.push_back(l);
  }
  if (c < 2 || c > static_cast<int>(available.size())) {
    throw Error(ErrorCode::OutOfRange, "cluster count " + std::to_string(c) + " outside [2, " +
                                           std::to_string(available.size()) + "]");
  }
  Rng rng(seed);
  std::vector<int> chosen;
  for (int idx : sample_distinct(rng, static_cast<int>(available.size()), c)) {
    chosen.push_back(available[static_cast<std::size_t>(idx)]);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

namespace {

// Sample indices kept and their new labels.
std::pair<std::vector<Eigen::Index>, std::vector<int>> class_subset(
    const std::vector<int>& labels, int class_count, int c, std::uint64_t seed) {
  const std::vector<int> chosen = choose_classes(labels, class_count, c, seed);
  std::vector<int> remap(static_cast<std::size_t>(class_count), -1);
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    remap[static_cast<std::size_t>(chosen[i])] = static_cast<int>(i);
  }
  std::vector<Eigen::Index> keep;
  std::vector<int> relabeled;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const int m = remap[static_cast<std::size_t>(labels[j])];
    if (m >= 0) {
      keep.push_back(static_cast<Eigen::Index>(j));
      relabeled.push_back(m);
    }
  }
  return {std::move(keep), std::move(relabeled)};
}

}  // namespace

ReducedDataset subsample_classes(const ReducedDataset& data, int c, std::uint64_t seed) {
  if (data.labels.size() != static_cast<std::size_t>(data.X.cols())) {
    throw Error(ErrorCode::ShapeMismatch, "dataset labels do not match its columns");
  }
  auto [keep, relabeled] = class_subset(data.labels, data.class_count, c, seed);
  ReducedDataset out;
  out.X.resize(data.X.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.X.col(static_cast<Eigen::Index>(i)) = data.X.col(keep[i]);
  }
  out.labels = std::move(relabeled);
  out.class_count = c;
  out.reduction_meta = data.reduction_meta;
  return out;
}

LabeledCorpus subsample_classes(const LabeledCorpus& corpus, int c, std::uint64_t seed) {
  corpus.validate();
  auto [keep, relabeled] = class_subset(corpus.labels, corpus.class_count, c, seed);
  LabeledCorpus out = select_rows(corpus, keep);
  out.labels = std::move(relabeled);
  out.class_count = c;
  return out;
}

}  // namespace tkm
