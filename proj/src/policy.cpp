#include "commgp/policy.hpp"

#include <algorithm>
#include <limits>

namespace commgp {

const char *to_string(PolicyKind policy) {
  switch (policy) {
  case PolicyKind::Good:
    return "good";
  case PolicyKind::Random:
    return "random";
  case PolicyKind::Bad:
    return "bad";
  }
  return "unknown";
}

PolicyKind policy_from_string(const std::string &name) {
  if (name == "good")
    return PolicyKind::Good;
  if (name == "random")
    return PolicyKind::Random;
  if (name == "bad")
    return PolicyKind::Bad;
  throw InvalidArgument("unknown policy '" + name + "' (expected good, random, bad)");
}

namespace {

PointMatrix rows_of(const PointMatrix &X, const std::vector<Eigen::Index> &indices) {
  PointMatrix out(static_cast<Eigen::Index>(indices.size()), 4);
  for (std::size_t i = 0; i < indices.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = X.row(indices[i]);
  return out;
}

// Subset trace from the precomputed candidate Gram so that the search and a
// later trace_tilde() recomputation produce bit-identical values.
double subset_trace(const MatrixXd &G, const std::vector<Eigen::Index> &subset,
                    double jitter) {
  const Eigen::Index m = static_cast<Eigen::Index>(subset.size());
  const Eigen::Index n = G.rows();
  MatrixXd Kmm(m, m);
  MatrixXd Kmn(m, n);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b)
      Kmm(a, b) = G(subset[static_cast<std::size_t>(a)],
                    subset[static_cast<std::size_t>(b)]);
    Kmn.row(a) = G.row(subset[static_cast<std::size_t>(a)]);
  }
  return trace_tilde_from_blocks(Kmm, Kmn, static_cast<double>(n), jitter);
}

template <typename Better>
std::vector<Eigen::Index> exhaustive_search(const MatrixXd &G, int m, Better better,
                                            double jitter) {
  const Eigen::Index n = G.rows();
  std::vector<Eigen::Index> best;
  double best_trace = 0.0;
  // lexicographic subset order; strict improvement keeps the smallest tuple
  if (m == 1) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = subset_trace(G, {i}, jitter);
      if (best.empty() || better(t, best_trace)) {
        best = {i};
        best_trace = t;
      }
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double t = subset_trace(G, {i, j}, jitter);
        if (best.empty() || better(t, best_trace)) {
          best = {i, j};
          best_trace = t;
        }
      }
    }
  }
  return best;
}

template <typename Better>
std::vector<Eigen::Index> greedy_search(const MatrixXd &G, int m, Better better,
                                        double jitter) {
  const Eigen::Index n = G.rows();
  std::vector<Eigen::Index> chosen;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int step = 0; step < m; ++step) {
    Eigen::Index best_index = -1;
    double best_trace = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)])
        continue;
      auto trial = chosen;
      trial.push_back(i);
      std::sort(trial.begin(), trial.end());
      const double t = subset_trace(G, trial, jitter);
      if (best_index < 0 || better(t, best_trace)) {
        best_index = i;
        best_trace = t;
      }
    }
    chosen.push_back(best_index);
    used[static_cast<std::size_t>(best_index)] = true;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

} // namespace

std::vector<Eigen::Index> select_inducing(const PointMatrix &candidates, int m,
                                          PolicyKind policy,
                                          const KernelParams &params, Rng &rng,
                                          double jitter) {
  params.validate();
  const Eigen::Index n = candidates.rows();
  if (n == 0)
    throw InsufficientData("select_inducing: no candidates");
  if (m < 1 || m > n)
    throw InvalidArgument("select_inducing: need 1 <= m <= number of candidates");

  if (policy == PolicyKind::Random) {
    const auto draw = sample_without_replacement(static_cast<std::size_t>(n),
                                                 static_cast<std::size_t>(m), rng);
    std::vector<Eigen::Index> indices(draw.size());
    std::transform(draw.begin(), draw.end(), indices.begin(),
                   [](std::size_t i) { return static_cast<Eigen::Index>(i); });
    std::sort(indices.begin(), indices.end());
    return indices;
  }

  const MatrixXd G = gram(candidates, params);
  const auto minimize = [](double a, double b) { return a < b; };
  const auto maximize = [](double a, double b) { return a > b; };

  if (m <= 2) {
    return policy == PolicyKind::Good ? exhaustive_search(G, m, minimize, jitter)
                                      : exhaustive_search(G, m, maximize, jitter);
  }
  // beyond the broadcast budget studied here; greedy keeps it tractable
  return policy == PolicyKind::Good ? greedy_search(G, m, minimize, jitter)
                                    : greedy_search(G, m, maximize, jitter);
}

InducingPackage build_package(std::uint16_t agent_id, std::uint16_t region_id,
                              const PointMatrix &X_local,
                              const std::vector<int> &labels_local,
                              const PGState &pg_local, const LocalityRegion &region,
                              int m, PolicyKind policy, const KernelParams &params,
                              Rng &rng, double jitter) {
  params.validate();
  if (static_cast<std::size_t>(X_local.rows()) != labels_local.size() ||
      pg_local.w.size() != X_local.rows())
    throw InvalidArgument("build_package: local data sizes disagree");

  const auto inside = region_filter(X_local, region);
  if (static_cast<int>(inside.size()) < m)
    throw InsufficientData("build_package: region holds fewer points than m");

  PointMatrix X_region(static_cast<Eigen::Index>(inside.size()), 4);
  std::vector<int> labels_region(inside.size());
  PGState pg_region;
  pg_region.source = pg_local.source;
  pg_region.iterations = pg_local.iterations;
  pg_region.w.resize(static_cast<Eigen::Index>(inside.size()));
  for (std::size_t i = 0; i < inside.size(); ++i) {
    X_region.row(static_cast<Eigen::Index>(i)) = X_local.row(inside[i]);
    labels_region[i] = labels_local[static_cast<std::size_t>(inside[i])];
    pg_region.w[static_cast<Eigen::Index>(i)] = pg_local.w[inside[i]];
  }

  const auto chosen = select_inducing(X_region, m, policy, params, rng, jitter);
  const PointMatrix Z = rows_of(X_region, chosen);

  const VariationalPosterior vp =
      sparse_variational_posterior(X_region, labels_region, pg_region, Z, params, jitter);

  InducingPackage package;
  package.agent_id = agent_id;
  package.region_id = region_id;
  package.locations = vp.inducing_locations;
  package.mean = vp.mean;
  package.covariance = vp.covariance;
  return package;
}

} // namespace commgp
