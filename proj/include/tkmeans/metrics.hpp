#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tkm {

/// r x q table of counts; entry (k, l) is the number of samples placed in
/// cluster k whose true class is l.
class ContingencyTable {
 public:
  ContingencyTable(int clusters, int classes);
  /// Row-major nested counts. All rows must have equal length.
  static ContingencyTable from_rows(const std::vector<std::vector<std::int64_t>>& rows);

  int clusters() const noexcept { return clusters_; }
  int classes() const noexcept { return classes_; }
  std::int64_t total() const noexcept { return total_; }

  std::int64_t count(int cluster, int cls) const;
  std::int64_t cluster_size(int cluster) const;
  std::int64_t class_size(int cls) const;
  void add(int cluster, int cls, std::int64_t amount = 1);

 private:
  int clusters_;
  int classes_;
  std::int64_t total_ = 0;
  std::vector<std::int64_t> counts_;
};

/// Builds the table from per-sample labels. Cluster and class counts default
/// to (max label + 1); pass them explicitly when some labels are absent.
ContingencyTable contingency(std::span<const int> predicted, std::span<const int> truth,
                             int clusters = 0, int classes = 0);

/// (1/n) sum_k max_l n_k^l
double purity(const ContingencyTable& table);

/// -(1/(n log2 q)) sum_k sum_l n_k^l log2(n_k^l / n_k), with 0 log 0 = 0.
/// Zero for pure clusters, one when every cluster is uniform over all q
/// classes. Throws DegenerateClassCount when q < 2.
double entropy(const ContingencyTable& table);

}  // namespace tkm
