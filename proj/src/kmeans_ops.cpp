#include "tkmeans/kmeans_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tkmeans/errors.hpp"
#include "tkmeans/random.hpp"

namespace tkm {

AssignmentMatrix::AssignmentMatrix(std::vector<int> labels, int clusters)
    : labels_(std::move(labels)), clusters_(clusters) {
  if (clusters_ < 1) throw Error(ErrorCode::InvalidArgument, "cluster count must be >= 1");
  for (std::size_t j = 0; j < labels_.size(); ++j) {
    if (labels_[j] < 0 || labels_[j] >= clusters_) {
      throw Error(ErrorCode::InvalidArgument,
                  "label " + std::to_string(labels_[j]) + " of sample " + std::to_string(j) +
                      " outside [0, " + std::to_string(clusters_) + ")");
    }
  }
}

AssignmentMatrix AssignmentMatrix::from_dense(const Matrix& H) {
  std::vector<int> labels(static_cast<std::size_t>(H.cols()), -1);
  for (Eigen::Index j = 0; j < H.cols(); ++j) {
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
      const double h = H(i, j);
      if (h == 1.0) {
        if (labels[static_cast<std::size_t>(j)] != -1) {
          throw Error(ErrorCode::InvalidArgument,
                      "column " + std::to_string(j) + " has more than one 1");
        }
        labels[static_cast<std::size_t>(j)] = static_cast<int>(i);
      } else if (h != 0.0) {
        throw Error(ErrorCode::InvalidArgument, "indicator entries must be 0 or 1");
      }
    }
    if (labels[static_cast<std::size_t>(j)] == -1) {
      throw Error(ErrorCode::InvalidArgument, "column " + std::to_string(j) + " has no 1");
    }
  }
  return AssignmentMatrix(std::move(labels), static_cast<int>(H.rows()));
}

std::vector<Eigen::Index> AssignmentMatrix::cluster_sizes() const {
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(clusters_), 0);
  for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

bool AssignmentMatrix::has_empty_cluster() const {
  const auto sizes = cluster_sizes();
  return std::find(sizes.begin(), sizes.end(), 0) != sizes.end();
}

void AssignmentMatrix::require_nonempty() const {
  const auto sizes = cluster_sizes();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) {
      throw Error(ErrorCode::EmptyCluster, "cluster " + std::to_string(i) + " has no samples");
    }
  }
}

Matrix AssignmentMatrix::dense() const {
  Matrix H = Matrix::Zero(clusters_, samples());
  for (Eigen::Index j = 0; j < samples(); ++j) H(label(j), j) = 1.0;
  return H;
}

AssignmentMatrix AssignmentMatrix::relabeled(const std::vector<int>& perm) const {
  if (perm.size() != static_cast<std::size_t>(clusters_)) {
    throw Error(ErrorCode::DimensionMismatch, "permutation length differs from cluster count");
  }
  std::vector<int> out(labels_.size());
  for (std::size_t j = 0; j < labels_.size(); ++j) {
    out[j] = perm[static_cast<std::size_t>(labels_[j])];
  }
  return AssignmentMatrix(std::move(out), clusters_);
}

namespace {

void require_columns_match(const CoefficientMatrix& Z, const AssignmentMatrix& H) {
  if (Z.cols() != H.samples()) {
    throw Error(ErrorCode::DimensionMismatch,
                "Z has " + std::to_string(Z.cols()) + " columns but H covers " +
                    std::to_string(H.samples()) + " samples");
  }
}

// Cluster sums and sizes in one pass; sizes may contain zeros.
Centroids raw_means(const CoefficientMatrix& Z, const std::vector<int>& labels, int k,
                    std::vector<Eigen::Index>& sizes) {
  Centroids C = Centroids::Zero(Z.rows(), k);
  sizes.assign(static_cast<std::size_t>(k), 0);
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    const int l = labels[static_cast<std::size_t>(j)];
    C.col(l) += Z.col(j);
    ++sizes[static_cast<std::size_t>(l)];
  }
  for (int i = 0; i < k; ++i) {
    if (sizes[static_cast<std::size_t>(i)] > 0) {
      C.col(i) /= static_cast<double>(sizes[static_cast<std::size_t>(i)]);
    }
  }
  return C;
}

}  // namespace

Centroids centroids_from(const CoefficientMatrix& Z, const AssignmentMatrix& H) {
  require_columns_match(Z, H);
  H.require_nonempty();
  std::vector<Eigen::Index> sizes;
  return raw_means(Z, H.labels(), H.clusters(), sizes);
}

double kmeans_loss_sum(const CoefficientMatrix& Z, const AssignmentMatrix& H) {
  const Centroids C = centroids_from(Z, H);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    loss += (Z.col(j) - C.col(H.label(j))).squaredNorm();
  }
  return loss;
}

double kmeans_loss_factored(const CoefficientMatrix& Z, const AssignmentMatrix& H) {
  require_columns_match(Z, H);
  return build_projector(H).apply(Z).squaredNorm();
}

Projector::Projector(AssignmentMatrix H) : H_(std::move(H)) {
  H_.require_nonempty();
  const auto sizes = H_.cluster_sizes();
  inv_sizes_.reserve(sizes.size());
  for (auto s : sizes) inv_sizes_.push_back(1.0 / static_cast<double>(s));
}

Matrix Projector::apply_mean(const Matrix& M) const {
  if (M.cols() != H_.samples()) {
    throw Error(ErrorCode::DimensionMismatch, "projector applied to matrix of wrong width");
  }
  // (M H^T) (H H^T)^{-1} H, with H H^T diagonal.
  Matrix sums = Matrix::Zero(M.rows(), H_.clusters());
  for (Eigen::Index j = 0; j < M.cols(); ++j) sums.col(H_.label(j)) += M.col(j);
  for (int i = 0; i < H_.clusters(); ++i) sums.col(i) *= inv_sizes_[static_cast<std::size_t>(i)];
  Matrix out(M.rows(), M.cols());
  for (Eigen::Index j = 0; j < M.cols(); ++j) out.col(j) = sums.col(H_.label(j));
  return out;
}

Matrix Projector::apply(const Matrix& M) const { return M - apply_mean(M); }

Matrix Projector::dense() const {
  const Eigen::Index n = H_.samples();
  Matrix K = Matrix::Identity(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      if (H_.label(a) == H_.label(b)) {
        K(a, b) -= inv_sizes_[static_cast<std::size_t>(H_.label(a))];
      }
    }
  }
  return K;
}

Projector build_projector(const AssignmentMatrix& H) { return Projector(H); }

KMeansResult update_assignments(const CoefficientMatrix& Z, int k, const KMeansInit& init,
                                const KMeansOptions& options) {
  const Eigen::Index n = Z.cols();
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (k > n) {
    throw Error(ErrorCode::TooManyClusters,
                "k = " + std::to_string(k) + " exceeds sample count " + std::to_string(n));
  }
  if (!Z.allFinite()) throw Error(ErrorCode::NumericalBreakdown, "Z contains non-finite values");

  Centroids C;
  if (const auto* seed = std::get_if<std::uint64_t>(&init)) {
    Rng rng(*seed);
    const auto picks = sample_distinct(rng, static_cast<int>(n), k);
    C.resize(Z.rows(), k);
    for (int i = 0; i < k; ++i) C.col(i) = Z.col(picks[static_cast<std::size_t>(i)]);
  } else {
    C = std::get<Centroids>(init);
    if (C.rows() != Z.rows() || C.cols() != k) {
      throw Error(ErrorCode::DimensionMismatch, "initial centroids must be d x k");
    }
    if (!C.allFinite()) {
      throw Error(ErrorCode::NumericalBreakdown, "initial centroids are non-finite");
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  std::vector<int> previous;
  std::vector<Eigen::Index> sizes;
  int iter = 0;
  while (iter < options.max_iters) {
    ++iter;
    previous = labels;

    for (Eigen::Index j = 0; j < n; ++j) {
      int best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (int i = 0; i < k; ++i) {
        const double dist = (Z.col(j) - C.col(i)).squaredNorm();
        if (dist < best_dist) {
          best_dist = dist;
          best = i;
        }
      }
      labels[static_cast<std::size_t>(j)] = best;
    }

    sizes.assign(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    for (int e = 0; e < k; ++e) {
      if (sizes[static_cast<std::size_t>(e)] != 0) continue;
      Eigen::Index far = -1;
      double far_dist = -1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const int l = labels[static_cast<std::size_t>(j)];
        if (sizes[static_cast<std::size_t>(l)] < 2) continue;
        const double dist = (Z.col(j) - C.col(l)).squaredNorm();
        if (dist > far_dist) {
          far_dist = dist;
          far = j;
        }
      }
      // k <= n guarantees a donor cluster of size >= 2 exists.
      --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = e;
      sizes[static_cast<std::size_t>(e)] = 1;
      C.col(e) = Z.col(far);
    }

    Centroids next = raw_means(Z, labels, k, sizes);
    const double movement = (next - C).colwise().norm().maxCoeff();
    C = std::move(next);
    if (labels == previous || movement < options.centroid_tol) break;
  }

  KMeansResult result{AssignmentMatrix(std::move(labels), k), std::move(C), iter, 0.0};
  result.loss = kmeans_loss_sum(Z, result.assignments);
  return result;
}

KMeansResult kmeans_best_of(const CoefficientMatrix& Z, int k, int restarts,
                            std::uint64_t seed, const KMeansOptions& options) {
  if (restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be >= 1");
  KMeansResult best = update_assignments(Z, k, derive_seed(seed, 0), options);
  for (int r = 1; r < restarts; ++r) {
    KMeansResult trial =
        update_assignments(Z, k, derive_seed(seed, static_cast<std::uint64_t>(r)), options);
    if (trial.loss < best.loss) best = std::move(trial);
  }
  return best;
}

}  // namespace tkm
