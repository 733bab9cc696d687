#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "tkmeans/transform_ops.hpp"

namespace tkm {

/// Binary k x n cluster indicator H, stored by its column pattern: entry
/// (i, j) is 1 iff label(j) == i. Every column therefore has exactly one 1.
/// Empty rows are representable; operations that need H H^T invertible
/// check for them and throw EmptyCluster.
class AssignmentMatrix {
 public:
  AssignmentMatrix() = default;
  AssignmentMatrix(std::vector<int> labels, int clusters);

  /// Accepts a dense 0/1 matrix; throws InvalidArgument unless each column
  /// holds a single 1.
  static AssignmentMatrix from_dense(const Matrix& H);

  int clusters() const noexcept { return clusters_; }
  Eigen::Index samples() const noexcept { return static_cast<Eigen::Index>(labels_.size()); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int label(Eigen::Index j) const { return labels_[static_cast<std::size_t>(j)]; }

  /// Diagonal of H H^T.
  std::vector<Eigen::Index> cluster_sizes() const;
  bool has_empty_cluster() const;
  /// Throws EmptyCluster naming the first empty row.
  void require_nonempty() const;

  Matrix dense() const;

  /// Same partition with rows reordered: new row perm[i] = old row i.
  AssignmentMatrix relabeled(const std::vector<int>& perm) const;

  friend bool operator==(const AssignmentMatrix&, const AssignmentMatrix&) = default;

 private:
  std::vector<int> labels_;
  int clusters_ = 0;
};

/// d x k, column i is the centroid of cluster i.
using Centroids = Matrix;

Centroids centroids_from(const CoefficientMatrix& Z, const AssignmentMatrix& H);

/// sum_i sum_j h_ij ||z_j - mu_i||^2
double kmeans_loss_sum(const CoefficientMatrix& Z, const AssignmentMatrix& H);

/// ||Z - Z H^T (H H^T)^{-1} H||_F^2, with H H^T used as the diagonal of
/// cluster sizes.
double kmeans_loss_factored(const CoefficientMatrix& Z, const AssignmentMatrix& H);

/// K = I - H^T (H H^T)^{-1} H, kept implicitly. Right-multiplying a d x n
/// matrix by K subtracts each column's cluster mean; P = I - K replaces each
/// column by its cluster mean.
class Projector {
 public:
  explicit Projector(AssignmentMatrix H);

  const AssignmentMatrix& assignments() const noexcept { return H_; }

  /// M P: every column replaced by the mean of its cluster.
  Matrix apply_mean(const Matrix& M) const;
  /// M K = M - M P.
  Matrix apply(const Matrix& M) const;
  /// Dense n x n K. Intended for checks on small n.
  Matrix dense() const;

 private:
  AssignmentMatrix H_;
  std::vector<double> inv_sizes_;
};

Projector build_projector(const AssignmentMatrix& H);

struct KMeansOptions {
  int max_iters = 300;
  double centroid_tol = 1e-9;
};

/// Either a seed for picking k distinct columns of Z as initial centroids,
/// or an explicit d x k centroid matrix.
using KMeansInit = std::variant<std::uint64_t, Centroids>;

struct KMeansResult {
  AssignmentMatrix assignments;
  Centroids centroids;
  int iterations = 0;
  double loss = 0.0;
};

/// Lloyd iterations on the columns of Z. Ties go to the lowest centroid
/// index; a cluster that empties is re-seeded with the sample farthest from
/// its own centroid (taken from a cluster of size > 1). Stops when no label
/// changes, when no centroid moves more than centroid_tol, or at max_iters.
KMeansResult update_assignments(const CoefficientMatrix& Z, int k, const KMeansInit& init,
                                const KMeansOptions& options = {});

/// Best (lowest loss) of `restarts` seeded runs. Per-restart seeds are
/// derived from `seed` and the restart index.
KMeansResult kmeans_best_of(const CoefficientMatrix& Z, int k, int restarts,
                            std::uint64_t seed, const KMeansOptions& options = {});

}  // namespace tkm
