#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "tkmeans/errors.hpp"
#include "tkmeans/metrics.hpp"

using namespace tkm;

TEST_CASE("contingency examples") {
  const std::vector<int> a{0, 0, 1, 1};
  const ContingencyTable diag = contingency(a, a);
  CHECK(diag.count(0, 0) == 2);
  CHECK(diag.count(1, 1) == 2);
  CHECK(diag.count(0, 1) == 0);
  const ContingencyTable merged = contingency(std::vector<int>{0, 0, 0, 0}, std::vector<int>{0, 1, 0, 1});
  CHECK(merged.clusters() == 1);
  CHECK(merged.count(0, 0) == 2);
  CHECK(merged.count(0, 1) == 2);
  CHECK_THROWS_AS(contingency(std::vector<int>{0, 1}, std::vector<int>{0}), Error);
  CHECK_THROWS_AS(contingency(std::vector<int>{0, -1}, std::vector<int>{0, 0}), Error);
}

TEST_CASE("contingency margins match label histograms") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pred_d(0, 6), true_d(0, 4);
  std::vector<int> pred(1000), truth(1000);
  for (auto& p : pred) p = pred_d(rng);
  for (auto& t : truth) t = true_d(rng);
  const ContingencyTable t = contingency(pred, truth);
  CHECK(t.total() == 1000);
  for (int k = 0; k < t.clusters(); ++k) {
    CHECK(t.cluster_size(k) == std::count(pred.begin(), pred.end(), k));
  }
  for (int l = 0; l < t.classes(); ++l) {
    CHECK(t.class_size(l) == std::count(truth.begin(), truth.end(), l));
  }
}

TEST_CASE("purity golden values") {
  CHECK(purity(ContingencyTable::from_rows({{2, 0}, {0, 2}})) == 1.0);
  CHECK(purity(ContingencyTable::from_rows({{2, 2}})) == 0.5);
  CHECK(std::abs(purity(ContingencyTable::from_rows({{5, 1}, {2, 4}})) - 0.75) < 1e-12);
}

TEST_CASE("entropy golden values") {
  CHECK(entropy(ContingencyTable::from_rows({{2, 0}, {0, 2}})) == 0.0);
  CHECK(std::abs(entropy(ContingencyTable::from_rows({{2, 2}})) - 1.0) < 1e-12);
  // -(1/8)(2 (3 log2(3/4) + log2(1/4))), evaluated independently.
  CHECK(std::abs(entropy(ContingencyTable::from_rows({{3, 1}, {1, 3}})) - 0.8112781244591328) <
        1e-12);
  try {
    entropy(ContingencyTable::from_rows({{3}, {4}}));
    FAIL("expected DegenerateClassCount");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateClassCount);
  }
}

TEST_CASE("metric bounds and limiting cases") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> cell(0, 9);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<std::vector<std::int64_t>> rows(4, std::vector<std::int64_t>(3));
    for (auto& r : rows)
      for (auto& c : r) c = cell(rng);
    rows[0][0] += 1;
    const auto t = ContingencyTable::from_rows(rows);
    const double p = purity(t), e = entropy(t);
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
    CHECK(e >= 0.0);
    CHECK(e <= 1.0 + 1e-12);
  }
  // Every cluster uniform over all classes.
  CHECK(std::abs(entropy(ContingencyTable::from_rows({{3, 3, 3}, {1, 1, 1}})) - 1.0) < 1e-12);
  // Single-class clusters.
  const auto pure = ContingencyTable::from_rows({{4, 0, 0}, {0, 0, 2}, {0, 7, 0}, {1, 0, 0}});
  CHECK(purity(pure) == 1.0);
  CHECK(entropy(pure) == 0.0);
}

TEST_CASE("metrics are invariant to row and column permutations") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cell(0, 20);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::vector<std::int64_t>> rows(5, std::vector<std::int64_t>(4));
    for (auto& r : rows)
      for (auto& c : r) c = cell(rng) + 1;
    const auto base = ContingencyTable::from_rows(rows);
    auto permuted = rows;
    std::shuffle(permuted.begin(), permuted.end(), rng);
    std::vector<int> cols{0, 1, 2, 3};
    std::shuffle(cols.begin(), cols.end(), rng);
    for (auto& r : permuted) {
      const auto copy = r;
      for (std::size_t l = 0; l < cols.size(); ++l) r[l] = copy[static_cast<std::size_t>(cols[l])];
    }
    const auto t = ContingencyTable::from_rows(permuted);
    CHECK(std::abs(purity(t) - purity(base)) < 1e-12);
    CHECK(std::abs(entropy(t) - entropy(base)) < 1e-12);
  }
}

TEST_CASE("merging two clusters with identical class distributions changes nothing") {
  const auto split = ContingencyTable::from_rows({{2, 1, 3}, {4, 2, 6}, {0, 5, 1}});
  const auto merged = ContingencyTable::from_rows({{6, 3, 9}, {0, 5, 1}});
  CHECK(std::abs(purity(split) - purity(merged)) < 1e-12);
  CHECK(std::abs(entropy(split) - entropy(merged)) < 1e-12);
}
