#include "commgp/polya_gamma.hpp"

#include <cmath>

namespace commgp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Sum_{k>=1} 1 / ((k - 1/2)^2 + a^2) = (pi / (2a)) tanh(pi a).
double series_sum_closed_form(double a) {
  if (a < 1e-6) {
    // tanh expansion keeps the a -> 0 limit pi^2/2 smooth
    const double x = kPi * a;
    return kPi * kPi * (1.0 - x * x / 3.0 + 2.0 * x * x * x * x / 15.0) / 2.0;
  }
  return kPi / (2.0 * a) * std::tanh(kPi * a);
}

} // namespace

double pg_mean(double c) {
  const double ac = std::fabs(c);
  if (ac < 1e-4) {
    const double c2 = c * c;
    return 0.25 - c2 / 48.0 + c2 * c2 / 480.0;
  }
  return std::tanh(c / 2.0) / (2.0 * c);
}

double pg_sample(double c, Rng &rng) {
  const double a = std::fabs(c) / (2.0 * kPi);
  const double a2 = a * a;
  double partial_inverse = 0.0; // sum of 1/d_k over the sampled terms
  double sum = 0.0;
  for (int k = 1; k <= kPgSeriesTerms; ++k) {
    const double half = k - 0.5;
    const double dk = half * half + a2;
    sum += exponential(rng) / dk;
    partial_inverse += 1.0 / dk;
  }
  const double tail = series_sum_closed_form(a) - partial_inverse;
  return (sum + tail) / (2.0 * kPi * kPi);
}

VectorXd kappa_from_labels(const std::vector<int> &labels) {
  VectorXd kappa(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] != 0 && labels[n] != 1)
      throw InvalidArgument("labels must be 0 or 1");
    kappa[static_cast<Eigen::Index>(n)] = labels[n] - 0.5;
  }
  return kappa;
}

PGState gibbs_sample_w(const PointMatrix &X, const std::vector<int> &labels,
                       const KernelParams &params, int iterations, GibbsMode mode,
                       Rng &rng, double jitter) {
  params.validate();
  const Eigen::Index n = X.rows();
  if (n == 0 || static_cast<std::size_t>(n) != labels.size())
    throw InvalidArgument("gibbs_sample_w: points and labels must agree and be non-empty");
  if (iterations < 1)
    throw InvalidArgument("gibbs_sample_w: iterations must be >= 1");

  const MatrixXd K = gram(X, params);
  const VectorXd kappa = kappa_from_labels(labels);

  VectorXd f = VectorXd::Zero(n); // prior mean start
  VectorXd w(n);
  for (int it = 0; it < iterations; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double draw =
          mode == GibbsMode::Sampled ? pg_sample(f[i], rng) : pg_mean(f[i]);
      w[i] = std::max(draw, kWFloor);
    }

    // f | y, w: Sigma = (K^-1 + Omega)^-1 = K - K (K + Omega^-1)^-1 K
    MatrixXd B = K;
    B.diagonal() += w.cwiseInverse();
    const auto llt = robust_llt(B, jitter);
    MatrixXd sigma = K - K * llt.solve(K);
    sigma = ((sigma + sigma.transpose()) / 2.0).eval();
    const VectorXd mu = sigma * kappa;

    if (mode == GibbsMode::Sampled) {
      const auto sigma_llt = robust_llt(sigma, jitter);
      VectorXd z(n);
      for (Eigen::Index i = 0; i < n; ++i)
        z[i] = normal(rng);
      f = mu + sigma_llt.matrixL() * z;
    } else {
      f = mu;
    }
  }

  PGState state;
  state.w = std::move(w);
  state.source = mode;
  state.iterations = iterations;
  return state;
}

} // namespace commgp
