#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "test_util.hpp"
#include "tkmeans/errors.hpp"
#include "tkmeans/kmeans_ops.hpp"

using namespace tkm;
using tkm::test::random_assignment;
using tkm::test::random_int;
using tkm::test::random_matrix;

namespace {

Matrix row(std::initializer_list<double> values) {
  Matrix m(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index j = 0;
  for (double v : values) m(0, j++) = v;
  return m;
}

// Exhaustive minimum of the sum-of-squares loss over all 2-cluster splits
// with both sides nonempty.
double brute_force_two_means(const Matrix& Z) {
  const int n = static_cast<int>(Z.cols());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    double loss = 0.0;
    for (int side = 0; side < 2; ++side) {
      Vector mean = Vector::Zero(Z.rows());
      int count = 0;
      for (int j = 0; j < n; ++j) {
        if (((mask >> j) & 1u) == static_cast<unsigned>(side)) {
          mean += Z.col(j);
          ++count;
        }
      }
      mean /= count;
      for (int j = 0; j < n; ++j) {
        if (((mask >> j) & 1u) == static_cast<unsigned>(side)) loss += (Z.col(j) - mean).squaredNorm();
      }
    }
    best = std::min(best, loss);
  }
  return best;
}

}  // namespace

TEST_CASE("assignment matrix validation") {
  CHECK_THROWS_AS(AssignmentMatrix({0, 2}, 2), Error);
  Matrix bad(2, 2);
  bad << 1, 1, 1, 0;
  CHECK_THROWS_AS(AssignmentMatrix::from_dense(bad), Error);
  const AssignmentMatrix H = AssignmentMatrix::from_dense(Matrix::Identity(3, 3));
  CHECK(H.labels() == std::vector<int>{0, 1, 2});
  CHECK(H.dense() == Matrix::Identity(3, 3));
  CHECK(AssignmentMatrix({0, 0}, 2).has_empty_cluster());
}

TEST_CASE("centroids examples") {
  const Matrix Z = row({1, 3});
  CHECK(centroids_from(Z, AssignmentMatrix({0, 1}, 2)) == row({1, 3}));
  CHECK(centroids_from(Z, AssignmentMatrix({0, 0}, 1))(0, 0) == doctest::Approx(2.0));
  try {
    centroids_from(Z, AssignmentMatrix({0, 0}, 2));
    FAIL("expected EmptyCluster");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCluster);
  }
}

TEST_CASE("centroids match a per-cluster loop") {
  std::mt19937_64 rng(1);
  const Matrix Z = random_matrix(rng, 3, 12);
  const AssignmentMatrix H = random_assignment(rng, 12, 3);
  const Centroids C = centroids_from(Z, H);
  for (int i = 0; i < 3; ++i) {
    Vector sum = Vector::Zero(3);
    int count = 0;
    for (int j = 0; j < 12; ++j) {
      if (H.label(j) == i) {
        sum += Z.col(j);
        ++count;
      }
    }
    CHECK((C.col(i) - sum / count).norm() < 1e-14);
  }
}

TEST_CASE("loss examples") {
  CHECK(kmeans_loss_sum(row({0, 2}), AssignmentMatrix({0, 0}, 1)) == doctest::Approx(2.0));
  std::mt19937_64 rng(2);
  const Matrix Z = random_matrix(rng, 3, 6);
  const AssignmentMatrix singletons({0, 1, 2, 3, 4, 5}, 6);
  CHECK(kmeans_loss_sum(Z, singletons) == 0.0);
  CHECK(kmeans_loss_factored(Z, singletons) == 0.0);

  // One cluster: K is the centering matrix, the loss is the total scatter.
  const AssignmentMatrix one({0, 0, 0, 0, 0, 0}, 1);
  const Matrix centered = Z.colwise() - Z.rowwise().mean();
  CHECK(kmeans_loss_factored(Z, one) == doctest::Approx(centered.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("sum and factored losses agree with the dense projector formula") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const int d = random_int(rng, 1, 6), n = random_int(rng, 2, 30);
    const int k = random_int(rng, 1, std::min(5, n));
    const Matrix Z = random_matrix(rng, d, n);
    const AssignmentMatrix H = random_assignment(rng, n, k);
    const double sum = kmeans_loss_sum(Z, H);
    const double factored = kmeans_loss_factored(Z, H);
    const double dense = (Z * tkm::test::dense_projector(H)).squaredNorm();
    CHECK(std::abs(sum - factored) <= 1e-8 * (1.0 + sum));
    CHECK(std::abs(dense - factored) <= 1e-8 * (1.0 + sum));
  }
}

TEST_CASE("losses are invariant to relabeling and to shifts") {
  std::mt19937_64 rng(6);
  const Matrix Z = random_matrix(rng, 4, 15);
  const AssignmentMatrix H = random_assignment(rng, 15, 4);
  const AssignmentMatrix P = H.relabeled({2, 0, 3, 1});
  const Vector shift = random_matrix(rng, 4, 1, 10.0);
  const Matrix shifted = Z.colwise() + shift;
  const double base = kmeans_loss_sum(Z, H);
  CHECK(kmeans_loss_sum(Z, P) == doctest::Approx(base).epsilon(1e-12));
  CHECK(kmeans_loss_factored(Z, P) == doctest::Approx(base).epsilon(1e-12));
  CHECK(kmeans_loss_sum(shifted, H) == doctest::Approx(base).epsilon(1e-9));
  CHECK(kmeans_loss_factored(shifted, H) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("projector examples and invariants") {
  CHECK(build_projector(AssignmentMatrix({0, 1}, 2)).dense().isZero(0.0));
  Matrix centering(2, 2);
  centering << 0.5, -0.5, -0.5, 0.5;
  CHECK(build_projector(AssignmentMatrix({0, 0}, 1)).dense().isApprox(centering));
  CHECK_THROWS_AS(build_projector(AssignmentMatrix({0, 0, 0}, 2)), Error);

  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const AssignmentMatrix H = random_assignment(rng, 20, 4);
    const Projector proj = build_projector(H);
    const Matrix K = proj.dense();
    CHECK((K * K - K).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((K * H.dense().transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((K - tkm::test::dense_projector(H)).cwiseAbs().maxCoeff() < 1e-12);
    const Matrix M = random_matrix(rng, 3, 20);
    CHECK((proj.apply(M) - M * K).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("Lloyd separates two distant pairs") {
  Matrix Z(2, 4);
  Z << 0, 0, 10, 10, 0, 0.1, 10, 10.1;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const KMeansResult r = update_assignments(Z, 2, seed);
    CHECK(r.assignments.label(0) == r.assignments.label(1));
    CHECK(r.assignments.label(2) == r.assignments.label(3));
    CHECK(r.assignments.label(0) != r.assignments.label(2));
  }
}

TEST_CASE("Lloyd with k = n isolates every sample") {
  std::mt19937_64 rng(9);
  const Matrix Z = random_matrix(rng, 3, 7);
  const KMeansResult r = update_assignments(Z, 7, std::uint64_t{4});
  CHECK(r.loss == 0.0);
  CHECK(!r.assignments.has_empty_cluster());
}

TEST_CASE("Lloyd errors") {
  const Matrix Z = Matrix::Zero(2, 3);
  try {
    update_assignments(Z, 4, std::uint64_t{0});
    FAIL("expected TooManyClusters");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooManyClusters);
  }
  Matrix bad = Z;
  bad(1, 1) = std::numeric_limits<double>::infinity();
  try {
    update_assignments(bad, 2, std::uint64_t{0});
    FAIL("expected NumericalBreakdown");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NumericalBreakdown);
  }
  CHECK_THROWS_AS(update_assignments(Z, 2, Centroids::Zero(3, 2)), Error);
}

TEST_CASE("Lloyd repairs empty clusters") {
  // All three centroids start on top of each other: ties send every sample to
  // cluster 0, leaving 1 and 2 empty until re-seeded.
  Matrix Z(1, 6);
  Z << 0, 0.1, 5, 5.1, 10, 10.1;
  const KMeansResult r = update_assignments(Z, 3, Centroids::Zero(1, 3));
  CHECK(!r.assignments.has_empty_cluster());
  CHECK(r.loss < kmeans_loss_sum(Z, AssignmentMatrix({0, 0, 0, 0, 0, 0}, 1)));
}

TEST_CASE("Lloyd loss is non-increasing across iterations") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix Z = random_matrix(rng, 2, 60);
    const std::uint64_t seed = rng();
    double previous = std::numeric_limits<double>::infinity();
    for (int cap = 1; cap <= 15; ++cap) {
      KMeansOptions opts;
      opts.max_iters = cap;
      const double loss = update_assignments(Z, 5, seed, opts).loss;
      CHECK(loss <= previous + 1e-12);
      previous = loss;
    }
  }
}

TEST_CASE("Lloyd is deterministic and ties go to the lowest index") {
  std::mt19937_64 rng(13);
  const Matrix Z = random_matrix(rng, 3, 40);
  const KMeansResult a = update_assignments(Z, 4, std::uint64_t{99});
  const KMeansResult b = update_assignments(Z, 4, std::uint64_t{99});
  CHECK(a.assignments == b.assignments);
  CHECK(a.centroids == b.centroids);

  Centroids c(1, 2);
  c << 0.0, 2.0;
  KMeansOptions one;
  one.max_iters = 1;
  Matrix Z2(1, 3);
  Z2 << 1.0, -1.0, 3.0;
  CHECK(update_assignments(Z2, 2, c, one).assignments.label(0) == 0);
}

TEST_CASE("best of 50 restarts reaches the exhaustive optimum on tiny instances") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix Z = random_matrix(rng, 2, 8);
    const double exact = brute_force_two_means(Z);
    const KMeansResult r = kmeans_best_of(Z, 2, 50, rng());
    CHECK(r.loss == doctest::Approx(exact).epsilon(1e-10));
  }
}
