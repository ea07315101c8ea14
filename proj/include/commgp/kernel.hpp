#pragma once

#include "commgp/types.hpp"

#include <vector>

namespace commgp {

// Squared-exponential kernel with unit signal variance; the signal variance
// field exists only so configurations that try to change it can be rejected.
struct KernelParams {
  double lengthscale = 0.289;
  double signal_variance = 1.0;

  void validate() const;
};

// exp(-||a - b||^2 / (2 l^2)), in (0, 1].
double kernel_eval(const Vector4d &a, const Vector4d &b, const KernelParams &params);

// N x N Gram matrix with unit diagonal.
MatrixXd gram(const PointMatrix &X, const KernelParams &params);

// N x M cross-Gram matrix, entry (i, j) = k(x_i, z_j).
MatrixXd cross_gram(const PointMatrix &X, const PointMatrix &Z,
                    const KernelParams &params);

// Radius r such that k at distance r equals epsilon: r = l * sqrt(-2 log eps).
double locality_radius(double lengthscale, double epsilon);

// Euclidean ball in the standardized 4-D feature space.
struct LocalityRegion {
  Vector4d center = Vector4d::Zero();
  double radius = 0.0;

  bool contains(const Vector4d &p) const { return (p - center).norm() <= radius; }
};

// Indices of rows inside the region, in original order.
std::vector<Eigen::Index> region_filter(const PointMatrix &X,
                                        const LocalityRegion &region);

// LLT after adding jitter to the diagonal; throws NumericError on failure.
Eigen::LLT<MatrixXd> cholesky_with_jitter(MatrixXd A, double jitter = kDefaultJitter);

// LLT with an escalating jitter ladder: 0, jitter, 100 jitter, 10^4 jitter.
// Well-conditioned inputs factorize untouched, so algebraically equal
// quantities computed along different routes agree to machine precision;
// degenerate inputs still go through.  Throws NumericError when the ladder
// is exhausted.
Eigen::LLT<MatrixXd> robust_llt(const MatrixXd &A, double jitter = kDefaultJitter);

} // namespace commgp
