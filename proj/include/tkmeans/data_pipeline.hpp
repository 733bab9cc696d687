#pragma once

#include <Eigen/SparseCore>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tkmeans/transform_ops.hpp"

namespace tkm {

/// Samples are rows.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct LabeledCorpus {
  SparseMatrix features;   // samples x raw features, nonnegative
  std::vector<int> labels; // true class per sample, in [0, class_count)
  int class_count = 0;

  Eigen::Index samples() const noexcept { return features.rows(); }
  Eigen::Index raw_dim() const noexcept { return features.cols(); }
  void validate() const;
};

enum class Normalization { None, Tfidf };

Normalization parse_normalization(const std::string& text);
std::string to_string(Normalization mode);

struct ReductionMeta {
  std::string method = "none";
  int dim = 0;
  std::uint64_t seed = 0;
};

struct ReducedDataset {
  DataMatrix X;            // d x n, samples are columns
  std::vector<int> labels;
  int class_count = 0;
  ReductionMeta reduction_meta;

  Eigen::Index samples() const noexcept { return X.cols(); }
};

// File formats
//
// Features: Matrix Market coordinate text. Optional "%%MatrixMarket" banner
// and '%' comment lines, then a "rows cols nnz" header, then nnz lines
// "row col value" with 1-based indices. A "pattern" banner means entries
// carry no value and stand for 1. Duplicate coordinates and blank lines are
// rejected.
//
// Labels: one zero-based integer per line.

SparseMatrix read_matrix_market(const std::filesystem::path& path);
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m);
std::vector<int> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

LabeledCorpus load_corpus(const std::filesystem::path& features_path,
                          const std::filesystem::path& labels_path);
void save_corpus(const LabeledCorpus& corpus, const std::filesystem::path& features_path,
                 const std::filesystem::path& labels_path);

/// Removes all-zero sample rows; indices of removed rows go to `dropped`.
LabeledCorpus drop_empty_documents(const LabeledCorpus& corpus,
                                   std::vector<Eigen::Index>* dropped = nullptr);

/// tf * (ln((1 + N) / (1 + df)) + 1), then each sample row scaled to unit
/// l2 norm. Throws EmptyDocument naming the first all-zero row.
LabeledCorpus tfidf_normalize(const LabeledCorpus& corpus);

/// Drops empty documents (with a warning on stderr) and applies `mode`.
LabeledCorpus preprocess(const LabeledCorpus& corpus, Normalization mode);

/// Truncated SVD of the samples x features matrix A to `dim` components;
/// X = (U_d S_d)^T. Uses a seeded randomized range finder with power
/// iterations. The sketch spans the full range (so the result is exact)
/// whenever min(n, D) <= 1000 or dim + oversampling reaches it. Component
/// signs are fixed so the largest-magnitude loading of each is positive.
ReducedDataset reduce_dims(const LabeledCorpus& corpus, int dim, std::uint64_t seed);

enum class Scaling { None, Gram };

Scaling parse_scaling(const std::string& text);
std::string to_string(Scaling mode);

/// Rescales X so that trace(X X^T) = d, i.e. the Gram matrix has unit mean
/// eigenvalue. The transform regularizer weight is absolute, so this puts it
/// on the same footing across datasets and subsets. All-zero X is returned
/// unchanged.
DataMatrix scale_to_unit_gram(const DataMatrix& X);
DataMatrix apply_scaling(const DataMatrix& X, Scaling mode);

/// Dense columns taken as-is with no reduction.
ReducedDataset as_dataset(const LabeledCorpus& corpus);

/// Picks c distinct classes uniformly at random among the classes present,
/// keeps all their samples in original order and relabels the chosen classes
/// 0..c-1 by ascending original id.
ReducedDataset subsample_classes(const ReducedDataset& data, int c, std::uint64_t seed);
LabeledCorpus subsample_classes(const LabeledCorpus& corpus, int c, std::uint64_t seed);

/// The chosen original class ids, ascending. Exposed for protocol checks.
std::vector<int> choose_classes(const std::vector<int>& labels, int class_count, int c,
                                std::uint64_t seed);

}  // namespace tkm
