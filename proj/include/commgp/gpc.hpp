#pragma once

#include "commgp/kernel.hpp"
#include "commgp/polya_gamma.hpp"
#include "commgp/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace commgp {

struct LatentPosterior {
  VectorXd mean;
  MatrixXd covariance;
};

struct VariationalPosterior {
  PointMatrix inducing_locations;
  VectorXd mean;
  MatrixXd covariance;
};

struct LatentPrediction {
  double mean = 0.0;
  double variance = 1.0;
};

struct BoundReport {
  double l_lower = 0.0;
  double l_upper = 0.0;
  std::optional<double> log_marginal;
  double kl_upper_eigen = 0.0;
};

// Exact conditional posterior N(Sigma kappa, Sigma), Sigma = (K^-1 + Omega)^-1,
// computed as K - K (K + Omega^-1)^-1 K so K itself is never inverted.
LatentPosterior full_conditional_posterior(const PointMatrix &X,
                                           const std::vector<int> &labels,
                                           const PGState &pg,
                                           const KernelParams &params,
                                           double jitter = kDefaultJitter);

// Optimal closed-form q(f_M | w) = N(K_MM St^-1 K_MN kappa, K_MM St^-1 K_MM)
// with St = K_MM + K_MN Omega K_NM.  Equals the full posterior when Z = X.
VariationalPosterior sparse_variational_posterior(const PointMatrix &X,
                                                  const std::vector<int> &labels,
                                                  const PGState &pg,
                                                  const PointMatrix &Z,
                                                  const KernelParams &params,
                                                  double jitter = kDefaultJitter);

// Marginalized latent at a test point: mean k*M Kmm^-1 mu and variance
// k** - k*M Kmm^-1 kM* + k*M Kmm^-1 Cov Kmm^-1 kM*.
LatentPrediction predict_latent(const Vector4d &x_star,
                                const VariationalPosterior &vp,
                                const KernelParams &params,
                                double jitter = kDefaultJitter);

// Gauss-Hermite quadrature of logistic(f) N(f | mean, var), f = mean +
// sqrt(2 var) t.  Orders below 5 are rejected.
double predict_probability(double latent_mean, double latent_variance,
                           int quadrature_order = 61);

// tr(K_NN) - tr(K_NM Kmm^-1 K_MN); N for empty Z, tiny negatives clamped to 0.
double trace_tilde(const PointMatrix &X, const PointMatrix &Z,
                   const KernelParams &params, double jitter = kDefaultJitter);

// Same quantity from precomputed blocks; trace_knn = tr(K_NN).  Both the
// selection search and trace_tilde route through this so their values match
// bit for bit.
double trace_tilde_from_blocks(const MatrixXd &Kmm, const MatrixXd &Kmn,
                               double trace_knn, double jitter = kDefaultJitter);

// log p(y | w) = log C + log N(Omega^-1 kappa | 0, Omega^-1 + K_NN) with the
// PG normalization log C = sum_n [-log 2 + 0.5 log(2 pi / w_n) + kappa_n^2 /
// (2 w_n)], so the value is absolute.  Intended for small N.
double log_marginal_conditioned(const PointMatrix &X, const std::vector<int> &labels,
                                const PGState &pg, const KernelParams &params,
                                double jitter = kDefaultJitter);

// L_lower, L_upper (both absolute, sharing log C above), the exact conditioned
// log marginal for small N, and the eigenvalue form of the KL upper bound
// 0.5 tr(Kt) max(w) + ||kappa||^2 / (2 min(w)).
BoundReport bounds_report(const PointMatrix &X, const std::vector<int> &labels,
                          const PGState &pg, const PointMatrix &Z,
                          const KernelParams &params, double jitter = kDefaultJitter);

// Nodes and weights for integrating f(t) exp(-t^2); exposed for tests.
std::pair<VectorXd, VectorXd> gauss_hermite(int order);

} // namespace commgp
