#include "commgp/gpc.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace commgp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kLog2Pi = 1.8378770664093454835606594728112353;

double logistic(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_inputs(const PointMatrix &X, const std::vector<int> &labels,
                  const PGState &pg) {
  if (X.rows() == 0)
    throw InvalidArgument("empty training set");
  if (static_cast<std::size_t>(X.rows()) != labels.size())
    throw InvalidArgument("points and labels disagree in size");
  if (pg.w.size() != X.rows())
    throw InvalidArgument("PG state size does not match training set");
  if ((pg.w.array() <= 0.0).any())
    throw InvalidArgument("PG weights must be strictly positive");
}

// log C = sum_n [-log 2 + 0.5 log(2 pi / w_n) + kappa_n^2 / (2 w_n)], the
// normalization matching p(y_n | w_n, f_n) to its Gaussian kernel.
double log_pg_constant(const VectorXd &w, const VectorXd &kappa) {
  double log_c = 0.0;
  for (Eigen::Index n = 0; n < w.size(); ++n)
    log_c += -std::log(2.0) + 0.5 * std::log(2.0 * kPi / w[n]) +
             kappa[n] * kappa[n] / (2.0 * w[n]);
  return log_c;
}

double log_det_from_llt(const Eigen::LLT<MatrixXd> &llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

} // namespace

LatentPosterior full_conditional_posterior(const PointMatrix &X,
                                           const std::vector<int> &labels,
                                           const PGState &pg,
                                           const KernelParams &params,
                                           double jitter) {
  params.validate();
  check_inputs(X, labels, pg);
  const MatrixXd K = gram(X, params);
  const VectorXd kappa = kappa_from_labels(labels);

  MatrixXd B = K;
  B.diagonal() += pg.w.cwiseInverse();
  const auto llt = robust_llt(B, jitter);

  LatentPosterior post;
  MatrixXd sigma = K - K * llt.solve(K);
  post.covariance = (sigma + sigma.transpose()) / 2.0;
  post.mean = post.covariance * kappa;
  return post;
}

VariationalPosterior sparse_variational_posterior(const PointMatrix &X,
                                                  const std::vector<int> &labels,
                                                  const PGState &pg,
                                                  const PointMatrix &Z,
                                                  const KernelParams &params,
                                                  double jitter) {
  params.validate();
  check_inputs(X, labels, pg);
  if (Z.rows() == 0)
    throw InvalidArgument("sparse_variational_posterior: empty inducing set");

  const MatrixXd Kmm = gram(Z, params);
  const MatrixXd Kmn = cross_gram(Z, X, params);
  const VectorXd kappa = kappa_from_labels(labels);

  // St = K_MM + K_MN Omega K_NM, factorized once and reused
  MatrixXd St = Kmm + Kmn * pg.w.asDiagonal() * Kmn.transpose();
  St = ((St + St.transpose()) / 2.0).eval();
  const auto llt = robust_llt(St, jitter);

  VariationalPosterior vp;
  vp.inducing_locations = Z;
  vp.mean = Kmm * llt.solve(Kmn * kappa);
  MatrixXd cov = Kmm * llt.solve(Kmm);
  vp.covariance = (cov + cov.transpose()) / 2.0;
  return vp;
}

LatentPrediction predict_latent(const Vector4d &x_star,
                                const VariationalPosterior &vp,
                                const KernelParams &params, double jitter) {
  params.validate();
  const Eigen::Index m = vp.inducing_locations.rows();
  if (m == 0 || vp.mean.size() != m || vp.covariance.rows() != m)
    throw InvalidArgument("predict_latent: inconsistent variational posterior");

  VectorXd k_star(m);
  for (Eigen::Index j = 0; j < m; ++j)
    k_star[j] = kernel_eval(x_star, vp.inducing_locations.row(j), params);

  const MatrixXd Kmm = gram(vp.inducing_locations, params);
  const auto llt = robust_llt(Kmm, jitter);
  const VectorXd alpha = llt.solve(k_star); // K_MM^-1 k_M*

  LatentPrediction pred;
  pred.mean = alpha.dot(vp.mean);
  const double k_ss = params.signal_variance;
  const double nystrom = k_star.dot(alpha);
  const double correction = alpha.dot(vp.covariance * alpha);
  pred.variance = std::max(k_ss - nystrom + correction, 1e-12);
  return pred;
}

std::pair<VectorXd, VectorXd> gauss_hermite(int order) {
  if (order < 1)
    throw InvalidArgument("gauss_hermite: order must be positive");

  static std::mutex cache_mutex;
  static std::map<int, std::pair<VectorXd, VectorXd>> cache;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(order);
    if (it != cache.end())
      return it->second;
  }

  // Golub-Welsch on the Hermite recurrence: zero diagonal, off-diagonal
  // beta_k = sqrt(k / 2); weights are sqrt(pi) times the squared first
  // eigenvector components.
  MatrixXd J = MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double beta = std::sqrt(k / 2.0);
    J(k, k - 1) = beta;
    J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(J);
  if (solver.info() != Eigen::Success)
    throw NumericError("gauss_hermite: eigendecomposition failed");

  VectorXd nodes = solver.eigenvalues();
  VectorXd weights(order);
  for (int i = 0; i < order; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    weights[i] = std::sqrt(kPi) * v0 * v0;
  }

  std::lock_guard<std::mutex> lock(cache_mutex);
  return cache.emplace(order, std::make_pair(std::move(nodes), std::move(weights)))
      .first->second;
}

double predict_probability(double latent_mean, double latent_variance,
                           int quadrature_order) {
  if (quadrature_order < 5)
    throw InvalidArgument("predict_probability: quadrature order must be >= 5");
  if (!(latent_variance > 0.0))
    throw InvalidArgument("predict_probability: variance must be positive");

  const auto [nodes, weights] = gauss_hermite(quadrature_order);
  const double scale = std::sqrt(2.0 * latent_variance);
  double acc = 0.0;
  for (int i = 0; i < quadrature_order; ++i)
    acc += weights[i] * logistic(latent_mean + scale * nodes[i]);
  return acc / std::sqrt(kPi);
}

double trace_tilde_from_blocks(const MatrixXd &Kmm, const MatrixXd &Kmn,
                               double trace_knn, double jitter) {
  const auto llt = robust_llt(Kmm, jitter);
  const MatrixXd V =
      llt.matrixL().solve(Kmn); // tr(Q) = ||L^-1 K_MN||_F^2
  const double value = trace_knn - V.squaredNorm();
  return std::max(value, 0.0);
}

double trace_tilde(const PointMatrix &X, const PointMatrix &Z,
                   const KernelParams &params, double jitter) {
  params.validate();
  if (X.rows() == 0)
    throw InvalidArgument("trace_tilde: empty data set");
  const double trace_knn = static_cast<double>(X.rows()); // unit diagonal
  if (Z.rows() == 0)
    return trace_knn;
  return trace_tilde_from_blocks(gram(Z, params), cross_gram(Z, X, params),
                                 trace_knn, jitter);
}

double log_marginal_conditioned(const PointMatrix &X, const std::vector<int> &labels,
                                const PGState &pg, const KernelParams &params,
                                double jitter) {
  params.validate();
  check_inputs(X, labels, pg);
  const Eigen::Index n = X.rows();
  const VectorXd kappa = kappa_from_labels(labels);
  const VectorXd c = kappa.cwiseQuotient(pg.w); // Omega^-1 kappa

  MatrixXd cov = gram(X, params);
  cov.diagonal() += pg.w.cwiseInverse();
  const auto llt = robust_llt(cov, jitter);

  const double quad = c.dot(llt.solve(c));
  return log_pg_constant(pg.w, kappa) - 0.5 * (n * kLog2Pi + log_det_from_llt(llt) + quad);
}

BoundReport bounds_report(const PointMatrix &X, const std::vector<int> &labels,
                          const PGState &pg, const PointMatrix &Z,
                          const KernelParams &params, double jitter) {
  params.validate();
  check_inputs(X, labels, pg);
  if (Z.rows() == 0)
    throw InvalidArgument("bounds_report: empty inducing set");

  const Eigen::Index n = X.rows();
  const VectorXd kappa = kappa_from_labels(labels);
  const VectorXd c = kappa.cwiseQuotient(pg.w);
  const double log_c = log_pg_constant(pg.w, kappa);

  const MatrixXd Kmm = gram(Z, params);
  const MatrixXd Kmn = cross_gram(Z, X, params);
  const auto kmm_llt = robust_llt(Kmm, jitter);
  const MatrixXd V = kmm_llt.matrixL().solve(Kmn);
  const MatrixXd Q = V.transpose() * V; // K_NM K_MM^-1 K_MN

  // K~ diagonal entries, clamped to keep tr(Omega K~) nonnegative
  VectorXd ktilde_diag = VectorXd::Ones(n) - Q.diagonal();
  ktilde_diag = ktilde_diag.cwiseMax(0.0);
  const double trace_ktilde = ktilde_diag.sum();
  const double trace_omega_ktilde = pg.w.dot(ktilde_diag);

  MatrixXd sigma_b = Q;
  sigma_b.diagonal() += pg.w.cwiseInverse();
  const auto sigma_llt = robust_llt(sigma_b, jitter);
  const double log_det_sigma = log_det_from_llt(sigma_llt);

  BoundReport report;
  report.l_lower = log_c - 0.5 * (n * kLog2Pi + log_det_sigma +
                                  c.dot(sigma_llt.solve(c)) + trace_omega_ktilde);

  MatrixXd upper_cov = sigma_b;
  upper_cov.diagonal().array() += trace_ktilde; // p I with p = tr(K~)
  const auto upper_llt = robust_llt(upper_cov, jitter);
  report.l_upper =
      log_c - 0.5 * (n * kLog2Pi + log_det_sigma + c.dot(upper_llt.solve(c)));

  report.kl_upper_eigen = 0.5 * trace_ktilde * pg.w.maxCoeff() +
                          kappa.squaredNorm() / (2.0 * pg.w.minCoeff());

  if (n <= 512)
    report.log_marginal = log_marginal_conditioned(X, labels, pg, params, jitter);
  return report;
}

} // namespace commgp
