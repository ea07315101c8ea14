#include <doctest.h>

#include "commgp/gpc.hpp"

#include <cmath>
#include <vector>

using namespace commgp;

namespace {

PointMatrix random_points(int n, Rng &rng, double scale = 1.0) {
  PointMatrix X(n, 4);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 4; ++k)
      X(i, k) = scale * normal(rng);
  return X;
}

std::vector<int> random_labels(int n, Rng &rng) {
  std::vector<int> y(static_cast<std::size_t>(n));
  for (auto &v : y)
    v = uniform_double(rng) < 0.5 ? 0 : 1;
  return y;
}

PGState random_pg(int n, Rng &rng) {
  PGState pg;
  pg.w.resize(n);
  for (int i = 0; i < n; ++i)
    pg.w[i] = pg_sample(2.0 * normal(rng), rng);
  return pg;
}

double logistic_ref(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// dense trapezoid integration of logistic(f) N(f | mean, var)
double trapezoid_probability(double mean, double var, int points = 400001) {
  const double sd = std::sqrt(var);
  const double lo = mean - 14.0 * sd, hi = mean + 14.0 * sd;
  const double h = (hi - lo) / (points - 1);
  double acc = 0.0;
  for (int i = 0; i < points; ++i) {
    const double f = lo + h * i;
    const double g = logistic_ref(f) *
                     std::exp(-(f - mean) * (f - mean) / (2.0 * var)) /
                     std::sqrt(2.0 * 3.14159265358979323846 * var);
    acc += (i == 0 || i == points - 1) ? 0.5 * g : g;
  }
  return acc * h;
}

const KernelParams kParams{1.0, 1.0};

} // namespace

TEST_CASE("full conditional posterior, scalar case") {
  PointMatrix X(1, 4);
  X.setZero();
  PGState pg;
  pg.w = VectorXd::Ones(1);
  const LatentPosterior post = full_conditional_posterior(X, {1}, pg, kParams);
  CHECK(post.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(post.mean[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("full conditional posterior, infinitely informative limit") {
  PointMatrix X(1, 4);
  X.setZero();
  PGState pg;
  pg.w = VectorXd::Constant(1, 1e12);
  const LatentPosterior post = full_conditional_posterior(X, {1}, pg, kParams);
  CHECK(post.covariance(0, 0) < 1e-10);
}

TEST_CASE("full conditional posterior matches brute force inverse") {
  Rng rng = make_rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 6));
    const PointMatrix X = random_points(n, rng);
    const auto y = random_labels(n, rng);
    const PGState pg = random_pg(n, rng);

    const LatentPosterior post = full_conditional_posterior(X, y, pg, kParams);

    const MatrixXd K = gram(X, kParams);
    const MatrixXd sigma_exact =
        (K.inverse() + MatrixXd(pg.w.asDiagonal())).inverse();
    const VectorXd mean_exact = sigma_exact * kappa_from_labels(y);
    CHECK((post.covariance - sigma_exact).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((post.mean - mean_exact).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("sparse posterior is exact when Z equals X") {
  PointMatrix X(1, 4);
  X.setZero();
  PGState pg;
  pg.w = VectorXd::Ones(1);
  const VariationalPosterior vp =
      sparse_variational_posterior(X, {1}, pg, X, kParams);
  CHECK(vp.mean[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(vp.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  Rng rng = make_rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 19));
    const PointMatrix Xt = random_points(n, rng);
    const auto y = random_labels(n, rng);
    const PGState pgt = random_pg(n, rng);
    const auto full = full_conditional_posterior(Xt, y, pgt, kParams);
    const auto sparse = sparse_variational_posterior(Xt, y, pgt, Xt, kParams);
    CHECK((full.mean - sparse.mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((full.covariance - sparse.covariance).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("flipping labels negates the variational mean only") {
  Rng rng = make_rng(17);
  const int n = 8;
  const PointMatrix X = random_points(n, rng);
  auto y = random_labels(n, rng);
  const PGState pg = random_pg(n, rng);
  const PointMatrix Z = X.topRows(3);

  const auto vp = sparse_variational_posterior(X, y, pg, Z, kParams);
  for (auto &v : y)
    v = 1 - v;
  const auto vp_flipped = sparse_variational_posterior(X, y, pg, Z, kParams);
  CHECK((vp.mean + vp_flipped.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((vp.covariance - vp_flipped.covariance).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("predict_latent recovers the prior far away") {
  VariationalPosterior vp;
  vp.inducing_locations = PointMatrix(1, 4);
  vp.inducing_locations << 0, 0, 0, 0;
  vp.mean = VectorXd::Constant(1, 0.7);
  vp.covariance = MatrixXd::Constant(1, 1, 0.3);

  const Vector4d far(100, 100, 100, 100);
  const auto pred = predict_latent(far, vp, kParams);
  CHECK(std::fabs(pred.mean) < 1e-12);
  CHECK(pred.variance == doctest::Approx(1.0).epsilon(1e-12));

  // interpolation at the inducing point itself
  const auto at = predict_latent(Vector4d::Zero(), vp, kParams);
  CHECK(at.mean == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(at.variance == doctest::Approx(0.3).epsilon(1e-7));
}

TEST_CASE("predict_latent agrees with a 2-D quadrature oracle") {
  Rng rng = make_rng(23);
  PointMatrix Z = random_points(2, rng, 0.4);
  VariationalPosterior vp;
  vp.inducing_locations = Z;
  vp.mean = VectorXd(2);
  vp.mean << 0.4, -0.2;
  MatrixXd A(2, 2);
  A << 0.6, 0.1, -0.2, 0.5;
  vp.covariance = A * A.transpose();

  const Vector4d x_star(0.3, -0.1, 0.2, 0.0);
  const auto pred = predict_latent(x_star, vp, kParams);

  // brute force: integrate the conditional-prior moments over q(f_M)
  const MatrixXd Kmm = gram(Z, kParams);
  VectorXd k_star(2);
  for (int j = 0; j < 2; ++j)
    k_star[j] = kernel_eval(x_star, Z.row(j), kParams);
  const VectorXd alpha = Kmm.ldlt().solve(k_star);
  const double cond_var = 1.0 - k_star.dot(alpha);

  const auto [nodes, weights] = gauss_hermite(60);
  const Eigen::LLT<MatrixXd> llt(vp.covariance);
  const MatrixXd L = llt.matrixL();
  double mass = 0.0, first = 0.0, second = 0.0;
  for (int i = 0; i < nodes.size(); ++i)
    for (int j = 0; j < nodes.size(); ++j) {
      const double wij = weights[i] * weights[j];
      Eigen::Vector2d t;
      t << nodes[i], nodes[j];
      const VectorXd fm = vp.mean + std::sqrt(2.0) * (L * t);
      const double cond_mean = alpha.dot(fm);
      mass += wij;
      first += wij * cond_mean;
      second += wij * (cond_var + cond_mean * cond_mean);
    }
  const double mean_oracle = first / mass;
  const double var_oracle = second / mass - mean_oracle * mean_oracle;

  CHECK(std::fabs(pred.mean - mean_oracle) < 1e-6);
  CHECK(std::fabs(pred.variance - var_oracle) < 1e-6);
}

TEST_CASE("predict_probability") {
  CHECK(predict_probability(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(predict_probability(0.0, 17.3) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(predict_probability(10.0, 0.01) > 0.999);
  CHECK(predict_probability(-10.0, 0.01) < 0.001);

  CHECK(std::fabs(predict_probability(1.0, 1.0) - trapezoid_probability(1.0, 1.0)) <
        1e-6);

  CHECK_THROWS_AS(predict_probability(0.0, 1.0, 4), InvalidArgument);
  CHECK_THROWS_AS(predict_probability(0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(predict_probability(0.0, -1.0), InvalidArgument);
}

TEST_CASE("predict_probability is monotone in the latent mean") {
  for (const double var : {0.2, 1.0, 5.0}) {
    double prev = 0.0;
    for (double mean = -8.0; mean <= 8.0; mean += 0.25) {
      const double p = predict_probability(mean, var);
      if (mean > -8.0)
        CHECK(p > prev);
      prev = p;
    }
  }
}

TEST_CASE("quadrature order 61 vs 121") {
  // agreement to 1e-9 holds on the variance <= 4 part of the grid; beyond
  // that plain Gauss-Hermite with this change of variables loses digits
  for (double mean = -10.0; mean <= 10.0; mean += 2.5)
    for (const double var : {0.04, 0.25, 1.0, 2.25, 4.0}) {
      const double p61 = predict_probability(mean, var, 61);
      const double p121 = predict_probability(mean, var, 121);
      CHECK(std::fabs(p61 - p121) < 1e-9);
    }
}

TEST_CASE("trace_tilde special cases") {
  Rng rng = make_rng(37);
  const PointMatrix X = random_points(7, rng, 0.5);

  CHECK(trace_tilde(X, X, kParams) <= 1e-10);
  CHECK(trace_tilde(X, PointMatrix(0, 4), kParams) == 7.0);

  PointMatrix pair(2, 4);
  pair << 0, 0, 0, 0, 0.8, 0, 0, 0;
  const double k = std::exp(-0.64 / 2.0);
  CHECK(trace_tilde(pair, pair.topRows(1), kParams) ==
        doctest::Approx(1.0 - k * k).epsilon(1e-9));
  CHECK(trace_tilde(pair, pair.bottomRows(1), kParams) ==
        doctest::Approx(1.0 - k * k).epsilon(1e-9));
}

TEST_CASE("trace_tilde never increases when growing Z") {
  Rng rng = make_rng(41);
  const int n = 8;
  const PointMatrix X = random_points(n, rng, 0.6);

  std::vector<double> subset_traces(1u << n, 0.0);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<Eigen::Index> idx;
    for (int b = 0; b < n; ++b)
      if (mask & (1u << b))
        idx.push_back(b);
    PointMatrix Z(static_cast<Eigen::Index>(idx.size()), 4);
    for (std::size_t i = 0; i < idx.size(); ++i)
      Z.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
    subset_traces[mask] = trace_tilde(X, Z, kParams);
    CHECK(subset_traces[mask] >= 0.0);
  }
  for (unsigned mask = 0; mask < (1u << n); ++mask)
    for (int b = 0; b < n; ++b) {
      if (mask & (1u << b))
        continue;
      CHECK(subset_traces[mask | (1u << b)] <= subset_traces[mask] + 1e-9);
    }
}

TEST_CASE("log marginal anchor at N=1") {
  PointMatrix X(1, 4);
  X.setZero();
  PGState pg;
  pg.w = VectorXd::Ones(1);
  const double lm = log_marginal_conditioned(X, {1}, pg, kParams);
  // frozen from logC + log N(1/2 | 0, 2)
  CHECK(lm == doctest::Approx(-0.97722077083991796).epsilon(1e-10));

  // independent oracle: trapezoid over p(y | w, f) p(f)
  const int points = 200001;
  const double lo = -30.0, hi = 30.0, h = (hi - lo) / (points - 1);
  double acc = 0.0;
  for (int i = 0; i < points; ++i) {
    const double f = lo + h * i;
    const double likelihood = 0.5 * std::exp(-0.5 * f * f + 0.5 * f);
    const double prior =
        std::exp(-0.5 * f * f) / std::sqrt(2.0 * 3.14159265358979323846);
    const double g = likelihood * prior;
    acc += (i == 0 || i == points - 1) ? 0.5 * g : g;
  }
  CHECK(lm == doctest::Approx(std::log(acc * h)).epsilon(1e-8));

  // label flip leaves the marginal unchanged
  CHECK(log_marginal_conditioned(X, {0}, pg, kParams) ==
        doctest::Approx(lm).epsilon(1e-13));
}

TEST_CASE("bounds collapse to the marginal when Z = X") {
  Rng rng = make_rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 10));
    const PointMatrix X = random_points(n, rng);
    const auto y = random_labels(n, rng);
    const PGState pg = random_pg(n, rng);

    const BoundReport report = bounds_report(X, y, pg, X, kParams);
    REQUIRE(report.log_marginal.has_value());
    CHECK(std::fabs(report.l_lower - *report.log_marginal) < 1e-8);
    CHECK(std::fabs(report.l_upper - *report.log_marginal) < 1e-8);
    // tr(K~) = 0 and kappa_n^2 = 1/4 leave N / (8 min w)
    CHECK(report.kl_upper_eigen ==
          doctest::Approx(n / (8.0 * pg.w.minCoeff())).epsilon(1e-9));
  }
}

TEST_CASE("bound sandwich and KL identity on random subsets") {
  Rng rng = make_rng(59);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 14));
    const PointMatrix X = random_points(n, rng);
    const auto y = random_labels(n, rng);
    const PGState pg = random_pg(n, rng);
    const int m = 1 + static_cast<int>(uniform_index(rng, n));
    const PointMatrix Z = X.topRows(m);

    const BoundReport report = bounds_report(X, y, pg, Z, kParams);
    REQUIRE(report.log_marginal.has_value());
    const double lm = *report.log_marginal;
    CHECK(report.l_lower <= lm + 1e-8);
    CHECK(lm <= report.l_upper + 1e-8);
    CHECK(report.l_lower <= report.l_upper + 1e-12);

    const double kl = lm - report.l_lower;
    CHECK(kl >= -1e-9);
    CHECK(kl <= report.kl_upper_eigen + 1e-9);
    CHECK(report.kl_upper_eigen >= 0.0);
  }
}

TEST_CASE("input validation") {
  PointMatrix X(2, 4);
  X.setZero();
  X(1, 0) = 1.0;
  PGState pg;
  pg.w = VectorXd::Ones(2);
  CHECK_THROWS_AS(full_conditional_posterior(X, {1}, pg, kParams), InvalidArgument);
  PGState bad;
  bad.w = VectorXd::Zero(2);
  CHECK_THROWS_AS(full_conditional_posterior(X, {1, 0}, bad, kParams),
                  InvalidArgument);
  CHECK_THROWS_AS(
      sparse_variational_posterior(X, {1, 0}, pg, PointMatrix(0, 4), kParams),
      InvalidArgument);
  CHECK_THROWS_AS(bounds_report(X, {1, 0}, pg, PointMatrix(0, 4), kParams),
                  InvalidArgument);
}
