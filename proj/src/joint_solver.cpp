#include "tkmeans/joint_solver.hpp"

#include <chrono>
#include <cmath>

#include "tkmeans/random.hpp"

namespace tkm {

void JointHyperparams::validate(Eigen::Index samples) const {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be positive");
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be >= 2");
  if (k > samples) {
    throw Error(ErrorCode::TooManyClusters, "k = " + std::to_string(k) +
                                                " exceeds sample count " +
                                                std::to_string(samples));
  }
  if (max_outer_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_outer_iters must be >= 1");
  if (!(outer_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "outer_tol must be >= 0");
  if (init_restarts < 1 || inner_restarts < 1 || inner_max_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "restart and iteration counts must be >= 1");
  }
}

std::optional<int> SolveTrace::first_iteration_below(double tol) const {
  double previous = initial_objective;
  for (const auto& r : records) {
    if (relative_change(previous, r.objective) < tol) return r.iteration;
    previous = r.objective;
  }
  return std::nullopt;
}

SolveAborted::SolveAborted(const std::string& message, SolveTrace trace)
    : Error(ErrorCode::NumericalBreakdown, message), trace_(std::move(trace)) {}

ObjectiveParts joint_objective_parts(const Transform& T, const DataMatrix& X,
                                     const CoefficientMatrix& Z, const AssignmentMatrix& H,
                                     double lambda, double mu) {
  if (T.rows() != T.cols() || T.cols() != X.rows() || Z.rows() != T.rows() ||
      Z.cols() != X.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "T, X, Z shapes are incompatible");
  }
  ObjectiveParts parts;
  parts.fit = (T * X - Z).squaredNorm();
  parts.regularizer = transform_regularizer(T, lambda);
  parts.cluster = kmeans_loss_factored(Z, H);
  parts.mu = mu;
  return parts;
}

double joint_objective(const Transform& T, const DataMatrix& X, const CoefficientMatrix& Z,
                       const AssignmentMatrix& H, double lambda, double mu) {
  return joint_objective_parts(T, X, Z, H, lambda, mu).total();
}

CoefficientMatrix update_coefficients_joint(const Transform& T, const DataMatrix& X,
                                            const AssignmentMatrix& H, double mu) {
  if (!(mu >= 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be nonnegative");
  if (T.rows() != T.cols() || T.cols() != X.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "T and X are not conformable");
  }
  const Projector projector(H);
  const Matrix TX = T * X;
  const double keep = 1.0 / (1.0 + mu);
  return keep * TX + (mu * keep) * projector.apply_mean(TX);
}

double relative_change(double previous, double current) {
  const double scale = std::max(std::abs(previous), std::abs(current));
  if (scale == 0.0) return 0.0;
  return std::abs(current - previous) / scale;
}

namespace {

KMeansResult update_h(const CoefficientMatrix& Z, const AssignmentMatrix& H,
                      const JointHyperparams& params, int iteration) {
  KMeansOptions options;
  options.max_iters = params.inner_max_iters;
  KMeansResult best = update_assignments(Z, params.k, centroids_from(Z, H), options);
  const std::uint64_t iter_seed =
      derive_seed(derive_seed(params.seed, 1), static_cast<std::uint64_t>(iteration));
  for (int r = 1; r < params.inner_restarts; ++r) {
    KMeansResult trial =
        update_assignments(Z, params.k, derive_seed(iter_seed, static_cast<std::uint64_t>(r)),
                           options);
    if (trial.loss < best.loss) best = std::move(trial);
  }
  return best;
}

}  // namespace

SolveResult solve(const DataMatrix& X, const JointHyperparams& params, const SolveInit& init) {
  using Clock = std::chrono::steady_clock;
  if (X.rows() < 1 || X.cols() < 1) throw Error(ErrorCode::InvalidArgument, "X is empty");
  if (!X.allFinite()) throw Error(ErrorCode::NumericalBreakdown, "X contains non-finite values");
  params.validate(X.cols());

  const Eigen::Index d = X.rows();
  Transform T = init.transform.value_or(Transform::Identity(d, d));
  if (T.rows() != d || T.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "initial transform must be d x d");
  }
  CoefficientMatrix Z = T * X;

  AssignmentMatrix H;
  if (init.assignments) {
    H = *init.assignments;
    if (H.samples() != X.cols() || H.clusters() != params.k) {
      throw Error(ErrorCode::DimensionMismatch, "initial assignments must be k x n");
    }
    H.require_nonempty();
  } else {
    H = kmeans_best_of(Z, params.k, params.init_restarts, derive_seed(params.seed, 0)).assignments;
  }

  SolveResult result;
  SolveTrace& trace = result.trace;
  double previous = joint_objective(T, X, Z, H, params.lambda, params.mu);
  trace.initial_objective = previous;
  if (!std::isfinite(previous)) throw SolveAborted("initial objective is not finite", trace);

  for (int it = 1; it <= params.max_outer_iters; ++it) {
    const auto start = Clock::now();
    TraceRecord rec;
    rec.iteration = it;
    rec.before = previous;

    T = update_transform(X, Z, params.lambda);
    rec.after_transform = joint_objective(T, X, Z, H, params.lambda, params.mu);

    Z = update_coefficients_joint(T, X, H, params.mu);
    rec.after_coefficients = joint_objective(T, X, Z, H, params.lambda, params.mu);

    rec.cluster_before_assign = kmeans_loss_factored(Z, H);
    KMeansResult km = update_h(Z, H, params, it);
    H = std::move(km.assignments);
    rec.kmeans_iterations = km.iterations;

    const ObjectiveParts parts = joint_objective_parts(T, X, Z, H, params.lambda, params.mu);
    rec.cluster_after_assign = parts.cluster;
    rec.objective = parts.total();
    rec.fit_term = parts.transform_term();
    rec.cluster_term = params.mu * parts.cluster;
    rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    trace.records.push_back(rec);

    if (!std::isfinite(rec.objective)) {
      throw SolveAborted("objective became non-finite at iteration " + std::to_string(it),
                         trace);
    }
    if (relative_change(previous, rec.objective) < params.outer_tol) {
      result.converged = true;
      break;
    }
    previous = rec.objective;
  }

  result.labels = H.labels();
  result.transform = std::move(T);
  result.coefficients = std::move(Z);
  result.assignments = std::move(H);
  return result;
}

}  // namespace tkm
