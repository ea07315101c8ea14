#pragma once

#include "commgp/kernel.hpp"
#include "commgp/rng.hpp"
#include "commgp/types.hpp"

#include <vector>

namespace commgp {

// Truncation depth of the Gamma-series PG(1,c) sampler.
inline constexpr int kPgSeriesTerms = 200;

// Entries of w are clamped up to this floor so Omega and its inverse stay
// finite in the likelihood and bound computations.
inline constexpr double kWFloor = 1e-6;

// E[PG(1,c)] = tanh(c/2) / (2c), continuously extended to 1/4 at c = 0.
double pg_mean(double c);

// One draw from PG(1, c).  Truncated Gamma series with the exact remaining
// tail expectation added as a constant; unbiased at every truncation depth.
double pg_sample(double c, Rng &rng);

enum class GibbsMode { Sampled, DeterministicMean };

struct PGState {
  VectorXd w;
  GibbsMode source = GibbsMode::Sampled;
  int iterations = 0;
};

// kappa_n = y_n - 1/2.
VectorXd kappa_from_labels(const std::vector<int> &labels);

// Two-block Gibbs sweep: w_n | f_n ~ PG(1, f_n), then f | y, w ~ N(Sigma kappa,
// Sigma) with Sigma = (K^-1 + Omega)^-1.  DeterministicMean replaces both draws
// by their conditional means, which makes the sweep a fixed-point iteration.
// Returns the final w (single draw, no averaging).
PGState gibbs_sample_w(const PointMatrix &X, const std::vector<int> &labels,
                       const KernelParams &params, int iterations, GibbsMode mode,
                       Rng &rng, double jitter = kDefaultJitter);

} // namespace commgp
