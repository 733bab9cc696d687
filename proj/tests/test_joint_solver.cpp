#include "doctest.h"

#include <Eigen/LU>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "tkmeans/data_pipeline.hpp"
#include "tkmeans/joint_solver.hpp"
#include "tkmeans/metrics.hpp"
#include "tkmeans/synthetic.hpp"

using namespace tkm;
using tkm::test::random_assignment;
using tkm::test::random_matrix;

namespace {

Matrix dense_z_update(const Matrix& T, const Matrix& X, const AssignmentMatrix& H, double mu) {
  const Eigen::Index n = X.cols();
  const Matrix K = tkm::test::dense_projector(H);
  const Matrix M = Matrix::Identity(n, n) + mu * K;
  return T * X * M.inverse();
}

ReducedDataset scaled_blobs(std::uint64_t seed) {
  BlobSpec spec;
  spec.seed = seed;
  ReducedDataset blobs = make_blobs(spec);
  blobs.X = scale_to_unit_gram(blobs.X);
  return blobs;
}

}  // namespace

TEST_CASE("joint objective examples") {
  const Matrix I = Matrix::Identity(2, 2);
  CHECK(joint_objective(I, I, I, AssignmentMatrix({0, 0}, 1), 1.0, 5.0) ==
        doctest::Approx(7.0).epsilon(1e-14));

  std::mt19937_64 rng(1);
  const Matrix T = random_matrix(rng, 3, 3) + 3.0 * Matrix::Identity(3, 3);
  const Matrix X = random_matrix(rng, 3, 6);
  const AssignmentMatrix singletons({0, 1, 2, 3, 4, 5}, 6);
  const double reg = 0.4 * (T.squaredNorm() - std::log(std::abs(T.determinant())));
  CHECK(joint_objective(T, X, T * X, singletons, 0.4, 2.0) == doctest::Approx(reg).epsilon(1e-12));
}

TEST_CASE("joint objective equals the sum of separately computed parts") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix T = random_matrix(rng, 4, 4);
    const Matrix X = random_matrix(rng, 4, 15);
    const Matrix Z = random_matrix(rng, 4, 15);
    const AssignmentMatrix H = random_assignment(rng, 15, 3);
    const Matrix K = tkm::test::dense_projector(H);
    const double expected = (T * X - Z).squaredNorm() +
                            0.7 * (T.squaredNorm() - std::log(std::abs(T.determinant()))) +
                            1.3 * (Z * K).squaredNorm();
    CHECK(joint_objective(T, X, Z, H, 0.7, 1.3) ==
          doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("coefficient update special cases") {
  std::mt19937_64 rng(3);
  const Matrix T = random_matrix(rng, 3, 3);
  const Matrix X = random_matrix(rng, 3, 8);
  const AssignmentMatrix H = random_assignment(rng, 8, 3);
  CHECK((update_coefficients_joint(T, X, H, 0.0) - T * X).cwiseAbs().maxCoeff() < 1e-14);
  const AssignmentMatrix singletons({0, 1, 2, 3, 4, 5, 6, 7}, 8);
  CHECK((update_coefficients_joint(T, X, singletons, 4.0) - T * X).cwiseAbs().maxCoeff() < 1e-13);
  CHECK_THROWS_AS(update_coefficients_joint(T, X, AssignmentMatrix({0, 0, 0, 0, 0, 0, 0, 0}, 2), 1.0),
                  Error);
}

TEST_CASE("coefficient update matches the dense inverse and the normal equation") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = tkm::test::random_int(rng, 3, 50);
    const int k = tkm::test::random_int(rng, 1, std::min(n, 6));
    const Matrix T = random_matrix(rng, 3, 3);
    const Matrix X = random_matrix(rng, 3, n);
    const AssignmentMatrix H = random_assignment(rng, n, k);
    const double mu = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
    const Matrix Z = update_coefficients_joint(T, X, H, mu);
    CHECK((Z - dense_z_update(T, X, H, mu)).cwiseAbs().maxCoeff() < 1e-10);
    const Matrix K = tkm::test::dense_projector(H);
    const Matrix residual = T * X - Z * (Matrix::Identity(n, n) + mu * K);
    CHECK(residual.norm() / (T * X).norm() < 1e-8);
  }
}

TEST_CASE("solve recovers well separated blobs") {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const ReducedDataset blobs = scaled_blobs(seed);
    JointHyperparams p;
    p.k = 3;
    p.seed = seed;
    const SolveResult r = solve(blobs.X, p);
    const ContingencyTable t = contingency(r.labels, blobs.labels);
    CHECK(purity(t) >= 0.99);
    CHECK(r.labels == r.assignments.labels());
  }
}

TEST_CASE("solve records a consistent trace with per-block descent") {
  const ReducedDataset blobs = scaled_blobs(5);
  JointHyperparams p;
  p.k = 3;
  p.max_outer_iters = 30;
  p.outer_tol = 0.0;
  const SolveResult r = solve(blobs.X, p);
  REQUIRE(r.trace.size() == 30);
  for (const auto& rec : r.trace.records) {
    CHECK(rec.after_transform <= rec.before + 1e-10);
    CHECK(rec.after_coefficients <= rec.after_transform + 1e-10);
    CHECK(rec.cluster_after_assign <= rec.cluster_before_assign + 1e-10);
    CHECK(std::isfinite(rec.objective));
    CHECK(rec.objective == doctest::Approx(rec.fit_term + rec.cluster_term).epsilon(1e-12));
  }
  const double final_obj = joint_objective(r.transform, blobs.X, r.coefficients, r.assignments,
                                           p.lambda, p.mu);
  CHECK(final_obj == doctest::Approx(r.trace.records.back().objective).epsilon(1e-12));
}

TEST_CASE("solve converges within twenty iterations on scaled blobs") {
  const ReducedDataset blobs = scaled_blobs(7);
  JointHyperparams p;
  p.k = 3;
  const SolveResult r = solve(blobs.X, p);
  const auto first = r.trace.first_iteration_below(1e-4);
  REQUIRE(first.has_value());
  CHECK(*first <= 20);
}

TEST_CASE("solve with k = n has zero clustering term") {
  std::mt19937_64 rng(8);
  const Matrix X = random_matrix(rng, 3, 6);
  JointHyperparams p;
  p.k = 6;
  p.mu = 1e-3;
  p.max_outer_iters = 5;
  const SolveResult r = solve(X, p);
  for (const auto& rec : r.trace.records) CHECK(rec.cluster_term == 0.0);
}

TEST_CASE("solve is deterministic") {
  const ReducedDataset blobs = scaled_blobs(9);
  JointHyperparams p;
  p.k = 3;
  p.seed = 42;
  p.inner_restarts = 3;
  const SolveResult a = solve(blobs.X, p);
  const SolveResult b = solve(blobs.X, p);
  CHECK(a.labels == b.labels);
  CHECK(a.transform == b.transform);
  CHECK(a.coefficients == b.coefficients);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace.records[i].objective == b.trace.records[i].objective);
  }
}

TEST_CASE("a zero clustering weight reduces the Z-step to Z = TX") {
  std::mt19937_64 rng(10);
  const Matrix X = random_matrix(rng, 4, 20);
  const Matrix T = update_transform(X, X, 1.0);
  const AssignmentMatrix H = random_assignment(rng, 20, 3);
  CHECK((update_coefficients_joint(T, X, H, 0.0) - T * X).norm() < 1e-13);
}

TEST_CASE("solve honours explicit initial state and validates parameters") {
  std::mt19937_64 rng(11);
  const Matrix X = random_matrix(rng, 2, 10);
  JointHyperparams p;
  p.k = 2;
  p.max_outer_iters = 1;
  SolveInit init;
  init.assignments = random_assignment(rng, 10, 2);
  init.transform = 2.0 * Matrix::Identity(2, 2);
  const SolveResult r = solve(X, p, init);
  const double expected =
      joint_objective(*init.transform, X, *init.transform * X, *init.assignments, p.lambda, p.mu);
  CHECK(r.trace.initial_objective == doctest::Approx(expected));

  JointHyperparams bad = p;
  bad.k = 11;
  CHECK_THROWS_AS(solve(X, bad), Error);
  bad = p;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(solve(X, bad), Error);
  bad = p;
  bad.k = 1;
  CHECK_THROWS_AS(solve(X, bad), Error);
  Matrix nan = X;
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(solve(nan, p), Error);
}

TEST_CASE("SolveAborted carries the trace") {
  SolveTrace trace;
  trace.records.push_back(TraceRecord{});
  const SolveAborted e("boom", trace);
  CHECK(e.code() == ErrorCode::NumericalBreakdown);
  CHECK(e.trace().size() == 1);
}
