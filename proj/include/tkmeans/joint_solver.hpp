#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tkmeans/errors.hpp"
#include "tkmeans/kmeans_ops.hpp"
#include "tkmeans/transform_ops.hpp"

namespace tkm {

// Transformed K-means:
//
//   min_{T,Z,H} ||TX - Z||_F^2 + lambda (||T||_F^2 - log|det T|)
//               + mu ||Z - Z H^T (H H^T)^{-1} H||_F^2
//
// solved by cyclic block-coordinate descent over T, Z, H. Each block update
// is an exact (T, Z) or non-increasing (H) minimization with the other two
// held fixed. There are no dual variables.

struct JointHyperparams {
  double lambda = 1.0;
  double mu = 1.0;
  int k = 2;
  int max_outer_iters = 50;
  double outer_tol = 1e-6;
  std::uint64_t seed = 0;
  /// Seeded K-means runs used to build the initial H from Z0 = X.
  int init_restarts = 20;
  /// Runs per H-update: the warm start from the previous H, plus
  /// (inner_restarts - 1) freshly seeded runs; the lowest loss wins.
  int inner_restarts = 1;
  /// Lloyd iteration cap inside each H-update. 1 gives a single
  /// assign/recenter step, the default runs to convergence.
  int inner_max_iters = 300;

  void validate(Eigen::Index samples) const;
};

struct ObjectiveParts {
  double fit = 0.0;         // ||TX - Z||_F^2
  double regularizer = 0.0; // lambda (||T||_F^2 - log|det T|)
  double cluster = 0.0;     // ||Z K||_F^2, unweighted
  double mu = 0.0;

  double transform_term() const { return fit + regularizer; }
  double total() const { return fit + regularizer + mu * cluster; }
};

struct TraceRecord {
  int iteration = 0;
  double objective = 0.0;     // joint objective after the full T, Z, H sweep
  double fit_term = 0.0;      // transform-learning part
  double cluster_term = 0.0;  // mu * ||Z K||_F^2
  double seconds = 0.0;       // wall time of this iteration
  // Joint objective at each block boundary within the iteration.
  double before = 0.0;
  double after_transform = 0.0;
  double after_coefficients = 0.0;
  // Unweighted clustering loss around the H-update.
  double cluster_before_assign = 0.0;
  double cluster_after_assign = 0.0;
  int kmeans_iterations = 0;
};

struct SolveTrace {
  double initial_objective = 0.0;
  std::vector<TraceRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  /// First 1-based iteration whose relative objective change is below tol,
  /// or nullopt.
  std::optional<int> first_iteration_below(double tol) const;
};

struct SolveResult {
  Transform transform;
  CoefficientMatrix coefficients;
  AssignmentMatrix assignments;
  std::vector<int> labels;
  SolveTrace trace;
  bool converged = false;
};

struct SolveInit {
  std::optional<Transform> transform;
  std::optional<AssignmentMatrix> assignments;
};

/// Raised when the objective stops being finite mid-solve. The trace up to
/// and including the failing iteration is attached.
class SolveAborted : public Error {
 public:
  SolveAborted(const std::string& message, SolveTrace trace);
  const SolveTrace& trace() const noexcept { return trace_; }

 private:
  SolveTrace trace_;
};

ObjectiveParts joint_objective_parts(const Transform& T, const DataMatrix& X,
                                     const CoefficientMatrix& Z, const AssignmentMatrix& H,
                                     double lambda, double mu);

double joint_objective(const Transform& T, const DataMatrix& X, const CoefficientMatrix& Z,
                       const AssignmentMatrix& H, double lambda, double mu);

/// Exact Z-subproblem minimizer Z = TX (I + mu K)^{-1}. With P = I - K the
/// cluster-mean projector, (I + mu K)^{-1} = P + (I - P)/(1 + mu), so
///   Z = TX/(1 + mu) + (mu/(1 + mu)) (TX) P.
/// mu = 0 is accepted and returns TX.
CoefficientMatrix update_coefficients_joint(const Transform& T, const DataMatrix& X,
                                            const AssignmentMatrix& H, double mu);

/// Relative objective change used for the stopping rule and trace analysis.
double relative_change(double previous, double current);

SolveResult solve(const DataMatrix& X, const JointHyperparams& params,
                  const SolveInit& init = {});

}  // namespace tkm
