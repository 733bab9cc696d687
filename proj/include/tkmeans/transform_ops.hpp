#pragma once

#include <Eigen/Core>

namespace tkm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Shapes used throughout the library:
//   data X          d x n, one sample per column
//   transform T     d x d, nonsingular
//   coefficients Z  d x n, Z ~ T X
using DataMatrix = Matrix;
using Transform = Matrix;
using CoefficientMatrix = Matrix;

struct TlHyperparams {
  double lambda = 1.0;  // weight of ||T||_F^2 - log|det T|
  double mu = 1.0;      // l1 weight on Z (sparse transform learning only)
};

struct LogDet {
  double log_abs = 0.0;
  int sign = 1;
};

/// log|det T| and sign(det T) from an LU factorization.
/// Throws TransformSingular if T is not square or is exactly singular.
LogDet log_abs_det(const Transform& T);

/// lambda * (||T||_F^2 - log|det T|)
double transform_regularizer(const Transform& T, double lambda);

/// ||TX - Z||_F^2 + lambda (||T||_F^2 - log|det T|) + mu ||Z||_1
double tl_objective(const Transform& T, const DataMatrix& X,
                    const CoefficientMatrix& Z, double lambda, double mu);

/// Elementwise sign(TX) * max(0, |TX| - mu). This is the exact minimizer
/// over Z of ||TX - Z||_F^2 + 2 mu ||Z||_1 (no 1/2 on the fit term).
CoefficientMatrix update_coefficients_soft_threshold(const Transform& T,
                                                     const DataMatrix& X,
                                                     double mu);

/// Closed-form minimizer over T of ||TX - Z||_F^2 + lambda(||T||_F^2 - log|det T|).
///
///   X X^T + lambda I = L L^T          (Cholesky, L lower triangular)
///   L^{-1} X Z^T     = U S V^T        (full SVD)
///   T = 0.5 V (S + (S^2 + 2 lambda I)^{1/2}) U^T L^{-1}
///
/// L^{-1} is only ever applied through triangular solves. The result is
/// nonsingular; its determinant carries the sign of det(X Z^T) and is left
/// as is because the objective depends on |det T| only.
Transform update_transform(const DataMatrix& X, const CoefficientMatrix& Z,
                           double lambda);

/// Gradient of the T-subproblem objective: 2(TX - Z)X^T + 2 lambda T - lambda T^{-T}.
Matrix transform_gradient(const Transform& T, const DataMatrix& X,
                          const CoefficientMatrix& Z, double lambda);

}  // namespace tkm
