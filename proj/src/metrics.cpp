#include "tkmeans/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tkmeans/errors.hpp"

namespace tkm {

ContingencyTable::ContingencyTable(int clusters, int classes)
    : clusters_(clusters), classes_(classes) {
  if (clusters < 1 || classes < 1) {
    throw Error(ErrorCode::InvalidArgument, "contingency table needs at least one row and column");
  }
  counts_.assign(static_cast<std::size_t>(clusters) * static_cast<std::size_t>(classes), 0);
}

ContingencyTable ContingencyTable::from_rows(
    const std::vector<std::vector<std::int64_t>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty contingency table");
  }
  ContingencyTable table(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != rows.front().size()) {
      throw Error(ErrorCode::DimensionMismatch, "ragged contingency rows");
    }
    for (std::size_t l = 0; l < rows[k].size(); ++l) {
      table.add(static_cast<int>(k), static_cast<int>(l), rows[k][l]);
    }
  }
  return table;
}

std::int64_t ContingencyTable::count(int cluster, int cls) const {
  return counts_[static_cast<std::size_t>(cluster) * static_cast<std::size_t>(classes_) +
                 static_cast<std::size_t>(cls)];
}

std::int64_t ContingencyTable::cluster_size(int cluster) const {
  std::int64_t s = 0;
  for (int l = 0; l < classes_; ++l) s += count(cluster, l);
  return s;
}

std::int64_t ContingencyTable::class_size(int cls) const {
  std::int64_t s = 0;
  for (int k = 0; k < clusters_; ++k) s += count(k, cls);
  return s;
}

void ContingencyTable::add(int cluster, int cls, std::int64_t amount) {
  if (cluster < 0 || cluster >= clusters_ || cls < 0 || cls >= classes_) {
    throw Error(ErrorCode::OutOfRange, "contingency cell out of range");
  }
  if (amount < 0) throw Error(ErrorCode::InvalidArgument, "counts must be nonnegative");
  counts_[static_cast<std::size_t>(cluster) * static_cast<std::size_t>(classes_) +
          static_cast<std::size_t>(cls)] += amount;
  total_ += amount;
}

ContingencyTable contingency(std::span<const int> predicted, std::span<const int> truth,
                             int clusters, int classes) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "label vectors differ in length: " + std::to_string(predicted.size()) + " vs " +
                    std::to_string(truth.size()));
  }
  if (predicted.empty()) throw Error(ErrorCode::InvalidArgument, "no samples");
  const auto negative = [](int v) { return v < 0; };
  if (std::any_of(predicted.begin(), predicted.end(), negative) ||
      std::any_of(truth.begin(), truth.end(), negative)) {
    throw Error(ErrorCode::InvalidArgument, "labels must be nonnegative");
  }
  const int r = std::max(clusters, *std::max_element(predicted.begin(), predicted.end()) + 1);
  const int q = std::max(classes, *std::max_element(truth.begin(), truth.end()) + 1);
  ContingencyTable table(r, q);
  for (std::size_t j = 0; j < predicted.size(); ++j) table.add(predicted[j], truth[j]);
  return table;
}

double purity(const ContingencyTable& table) {
  if (table.total() < 1) throw Error(ErrorCode::InvalidArgument, "purity of an empty table");
  std::int64_t majority = 0;
  for (int k = 0; k < table.clusters(); ++k) {
    std::int64_t best = 0;
    for (int l = 0; l < table.classes(); ++l) best = std::max(best, table.count(k, l));
    majority += best;
  }
  return static_cast<double>(majority) / static_cast<double>(table.total());
}

double entropy(const ContingencyTable& table) {
  if (table.classes() < 2) {
    throw Error(ErrorCode::DegenerateClassCount, "entropy needs at least two classes");
  }
  if (table.total() < 1) throw Error(ErrorCode::InvalidArgument, "entropy of an empty table");
  double acc = 0.0;
  for (int k = 0; k < table.clusters(); ++k) {
    const auto nk = static_cast<double>(table.cluster_size(k));
    for (int l = 0; l < table.classes(); ++l) {
      const auto nkl = static_cast<double>(table.count(k, l));
      if (nkl > 0.0) acc += nkl * std::log2(nkl / nk);
    }
  }
  const double value =
      -acc / (static_cast<double>(table.total()) * std::log2(static_cast<double>(table.classes())));
  return value == 0.0 ? 0.0 : value;  // no -0.0
}

}  // namespace tkm
