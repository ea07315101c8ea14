#pragma once

#include "commgp/gpc.hpp"
#include "commgp/kernel.hpp"
#include "commgp/polya_gamma.hpp"
#include "commgp/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace commgp {

enum class PolicyKind { Good, Random, Bad };

const char *to_string(PolicyKind policy);
PolicyKind policy_from_string(const std::string &name);

// Inducing-point subset of the candidates: Good minimizes trace_tilde, Bad
// maximizes it, Random draws uniformly without replacement.  Good/Bad search
// all C(n, m) subsets for m <= 2; a greedy sweep takes over for larger m.
// Ties resolve to the lexicographically smallest index tuple.
std::vector<Eigen::Index> select_inducing(const PointMatrix &candidates, int m,
                                          PolicyKind policy,
                                          const KernelParams &params, Rng &rng,
                                          double jitter = kDefaultJitter);

// The payload one agent broadcasts for one locality region.
struct InducingPackage {
  std::uint16_t agent_id = 0;
  std::uint16_t region_id = 0;
  PointMatrix locations;
  VectorXd mean;
  MatrixXd covariance;

  int m() const { return static_cast<int>(locations.rows()); }
};

// Filters the agent's data to the region, selects m inducing points by the
// policy, and computes q(f_m | w) from the in-region slice only (labels and w
// entries included), so deleting out-of-region points changes nothing.
InducingPackage build_package(std::uint16_t agent_id, std::uint16_t region_id,
                              const PointMatrix &X_local,
                              const std::vector<int> &labels_local,
                              const PGState &pg_local, const LocalityRegion &region,
                              int m, PolicyKind policy, const KernelParams &params,
                              Rng &rng, double jitter = kDefaultJitter);

} // namespace commgp
