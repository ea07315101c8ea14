#include "commgp/kernel.hpp"

#include <cmath>

namespace commgp {

void KernelParams::validate() const {
  if (!(lengthscale > 0.0))
    throw InvalidArgument("kernel lengthscale must be positive");
  if (signal_variance != 1.0)
    throw InvalidArgument("signal variance is fixed to 1");
}

double kernel_eval(const Vector4d &a, const Vector4d &b, const KernelParams &params) {
  const double d2 = (a - b).squaredNorm();
  return std::exp(-d2 / (2.0 * params.lengthscale * params.lengthscale));
}

MatrixXd gram(const PointMatrix &X, const KernelParams &params) {
  if (X.rows() == 0)
    throw InvalidArgument("gram: empty point set");
  const Eigen::Index n = X.rows();
  MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double k = kernel_eval(X.row(i), X.row(j), params);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

MatrixXd cross_gram(const PointMatrix &X, const PointMatrix &Z,
                    const KernelParams &params) {
  if (X.rows() == 0 || Z.rows() == 0)
    throw InvalidArgument("cross_gram: empty point set");
  MatrixXd K(X.rows(), Z.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < Z.rows(); ++j)
      K(i, j) = kernel_eval(X.row(i), Z.row(j), params);
  return K;
}

double locality_radius(double lengthscale, double epsilon) {
  if (!(lengthscale > 0.0))
    throw InvalidArgument("locality_radius: lengthscale must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw InvalidArgument("locality_radius: epsilon must lie in (0,1)");
  return lengthscale * std::sqrt(-2.0 * std::log(epsilon));
}

std::vector<Eigen::Index> region_filter(const PointMatrix &X,
                                        const LocalityRegion &region) {
  std::vector<Eigen::Index> indices;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    if (region.contains(X.row(i)))
      indices.push_back(i);
  return indices;
}

Eigen::LLT<MatrixXd> cholesky_with_jitter(MatrixXd A, double jitter) {
  A.diagonal().array() += jitter;
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw NumericError("Cholesky factorization failed after jitter");
  return llt;
}

Eigen::LLT<MatrixXd> robust_llt(const MatrixXd &A, double jitter) {
  for (const double scale : {0.0, 1.0, 100.0, 10000.0}) {
    MatrixXd B = A;
    B.diagonal().array() += scale * jitter;
    Eigen::LLT<MatrixXd> llt(B);
    if (llt.info() == Eigen::Success)
      return llt;
  }
  throw NumericError("Cholesky factorization failed after jitter ladder");
}

} // namespace commgp
