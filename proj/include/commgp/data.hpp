#pragma once

#include "commgp/rng.hpp"
#include "commgp/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace commgp {

// One transmit/receive attempt.  The feature vector is exactly
// [tx_easting, tx_northing, rx_easting, rx_northing].
struct CommEvent {
  double tx_easting = 0.0;
  double tx_northing = 0.0;
  double rx_easting = 0.0;
  double rx_northing = 0.0;
  int label = 0; // 1 success, 0 failure
  int tx_agent = 0;
  int rx_agent = 0;

  Vector4d features() const {
    return Vector4d(tx_easting, tx_northing, rx_easting, rx_northing);
  }
};

// CSV schema: header row
//   tx_easting,tx_northing,rx_easting,rx_northing,label,tx_agent,rx_agent
// Columns are matched by name; extra columns are ignored.  Parse errors
// report the offending row and column.
std::vector<CommEvent> ingest_csv(std::istream &in);
std::vector<CommEvent> ingest_csv_file(const std::string &path);
void write_csv(std::ostream &out, const std::vector<CommEvent> &events);
void write_csv_file(const std::string &path, const std::vector<CommEvent> &events);

// Per-dimension zero-mean unit-variance transform, fitted on the pooled
// dataset (population standard deviation).
struct Standardizer {
  Vector4d mean = Vector4d::Zero();
  Vector4d std = Vector4d::Ones();

  Vector4d apply(const Vector4d &raw) const;
  Vector4d invert(const Vector4d &standardized) const;
};

Standardizer fit_standardizer(const std::vector<CommEvent> &events);

PointMatrix feature_matrix(const std::vector<CommEvent> &events);
PointMatrix standardized_features(const std::vector<CommEvent> &events,
                                  const Standardizer &st);

struct SplitPlan {
  std::uint64_t seed = 0;
  double train_fraction = 0.65;
  int permutations = 100;
};

struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

// Deterministic function of (plan.seed, permutation_index); |train| =
// round(train_fraction * n) and the two halves partition [0, n).
Split permutation_split(std::size_t n_events, const SplitPlan &plan,
                        int permutation_index);

// Synthetic stand-in for field data: lawnmower trajectories, TDMA rounds,
// success ~ Bernoulli(logistic(intercept - slope * range + field)).
struct SynthSpec {
  int n_agents = 2;
  int rounds = 80; // every agent broadcasts once per round
  double area_width = 600.0;
  double area_height = 400.0;
  int legs = 5;
  int passes = 4;     // lawnmower repetitions; revisits populate locality regions
  int waypoints = 48; // distinct joint configurations per mission; 0 = continuous
  double success_intercept = 2.0;      // a
  double success_slope = 0.02;         // b, per meter of tx-rx range
  double noise = 0.0;                  // amplitude of the spatial field
  double noise_lengthscale = 150.0;    // meters
  std::uint64_t seed = 1;
};

std::vector<CommEvent> synthesize_dataset(const SynthSpec &spec);

// Threshold rule: correct iff (p > 0.5 and y = 1) or (p <= 0.5 and y = 0).
double accuracy(const std::vector<double> &probs, const std::vector<int> &labels);

// Mean negative Bernoulli log-likelihood with probabilities clipped to
// [1e-12, 1 - 1e-12].
double negative_log_likelihood(const std::vector<double> &probs,
                               const std::vector<int> &labels);

} // namespace commgp
