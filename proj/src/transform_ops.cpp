#include "tkmeans/transform_ops.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "tkmeans/errors.hpp"

namespace tkm {
namespace {

void require_square(const Transform& T) {
  if (T.rows() != T.cols() || T.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "transform must be square and nonempty, got " + std::to_string(T.rows()) +
                    "x" + std::to_string(T.cols()));
  }
}

void require_product_shapes(const Transform& T, const DataMatrix& X,
                            const CoefficientMatrix& Z) {
  require_square(T);
  if (T.cols() != X.rows() || Z.rows() != T.rows() || Z.cols() != X.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "incompatible shapes T " + std::to_string(T.rows()) + "x" +
                    std::to_string(T.cols()) + ", X " + std::to_string(X.rows()) + "x" +
                    std::to_string(X.cols()) + ", Z " + std::to_string(Z.rows()) + "x" +
                    std::to_string(Z.cols()));
  }
}

}  // namespace

LogDet log_abs_det(const Transform& T) {
  require_square(T);
  Eigen::PartialPivLU<Matrix> lu(T);
  const Matrix& packed = lu.matrixLU();
  LogDet out;
  out.sign = lu.permutationP().determinant();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    const double u = packed(i, i);
    if (u == 0.0 || !std::isfinite(u)) {
      throw Error(ErrorCode::TransformSingular, "log det undefined for singular transform");
    }
    if (u < 0.0) out.sign = -out.sign;
    out.log_abs += std::log(std::abs(u));
  }
  return out;
}

double transform_regularizer(const Transform& T, double lambda) {
  return lambda * (T.squaredNorm() - log_abs_det(T).log_abs);
}

double tl_objective(const Transform& T, const DataMatrix& X,
                    const CoefficientMatrix& Z, double lambda, double mu) {
  require_product_shapes(T, X, Z);
  const double fit = (T * X - Z).squaredNorm();
  return fit + transform_regularizer(T, lambda) + mu * Z.lpNorm<1>();
}

CoefficientMatrix update_coefficients_soft_threshold(const Transform& T,
                                                     const DataMatrix& X,
                                                     double mu) {
  require_square(T);
  if (T.cols() != X.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "T and X are not conformable");
  }
  if (mu < 0.0) throw Error(ErrorCode::InvalidArgument, "threshold must be nonnegative");
  const Matrix TX = T * X;
  return TX.unaryExpr([mu](double v) {
    const double mag = std::abs(v) - mu;
    if (mag <= 0.0) return 0.0;
    return v > 0.0 ? mag : -mag;
  });
}

Transform update_transform(const DataMatrix& X, const CoefficientMatrix& Z,
                           double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (X.cols() != Z.cols() || X.rows() != Z.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "X and Z must have identical shapes");
  }
  const Eigen::Index d = X.rows();

  Matrix gram = X * X.transpose();
  gram.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success || !gram.allFinite()) {
    throw Error(ErrorCode::NumericalBreakdown,
                "Cholesky of X X^T + lambda I failed (non-finite input?)");
  }
  const auto L = llt.matrixL();

  Matrix cross = X * Z.transpose();
  L.solveInPlace(cross);  // L^{-1} X Z^T

  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const Vector shrink =
      0.5 * (s.array() + (s.array().square() + 2.0 * lambda).sqrt()).matrix();

  // T = A L^{-1} with A = V diag(shrink) U^T, so T^T = L^{-T} A^T. The cross
  // term -2 tr(A U S V^T) is minimized by aligning A with V(.)U^T; the
  // U(.)V^T ordering is only correct when L^{-1} X Z^T is symmetric.
  const Matrix A = svd.matrixV() * shrink.asDiagonal() * svd.matrixU().transpose();
  Matrix Tt = A.transpose();
  llt.matrixU().solveInPlace(Tt);
  Transform T = Tt.transpose();

  if (!T.allFinite() || T.rows() != d) {
    throw Error(ErrorCode::NumericalBreakdown, "transform update produced non-finite values");
  }
  return T;
}

Matrix transform_gradient(const Transform& T, const DataMatrix& X,
                          const CoefficientMatrix& Z, double lambda) {
  require_product_shapes(T, X, Z);
  Eigen::PartialPivLU<Matrix> lu(T);
  const Matrix inv_t = lu.inverse().transpose();
  return 2.0 * (T * X - Z) * X.transpose() + 2.0 * lambda * T - lambda * inv_t;
}

}  // namespace tkm
