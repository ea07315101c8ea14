#pragma once

#include "commgp/data.hpp"
#include "commgp/gpc.hpp"
#include "commgp/policy.hpp"

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace commgp {

// Concatenated inducing variables with block-diagonal covariance; blocks are
// ordered by (agent_id, region_id), off-block entries exactly zero.
struct FusedPosterior {
  PointMatrix locations;
  VectorXd mean;
  MatrixXd covariance;
  std::vector<std::pair<std::uint16_t, std::uint16_t>> keys; // one per block
  std::vector<int> block_sizes;
};

// Throws InvalidArgument on an empty list or duplicate (agent, region) keys.
FusedPosterior fuse(std::vector<InducingPackage> packages);

LatentPrediction fused_latent(const Vector4d &x_star, const FusedPosterior &fused,
                              const KernelParams &params,
                              double jitter = kDefaultJitter);

double decentralized_predict(const Vector4d &x_star, const FusedPosterior &fused,
                             const KernelParams &params, int quadrature_order = 61,
                             double jitter = kDefaultJitter);

// One agent's view of the world: its own events (always as receiver), the PG
// state over them, and the packages heard so far keyed by (sender, region)
// with last-writer-wins replacement.
struct AgentState {
  std::uint16_t agent_id = 0;
  std::vector<CommEvent> local_events;
  PGState pg_state;
  std::map<std::pair<std::uint16_t, std::uint16_t>, InducingPackage> received;

  void add_event(const CommEvent &event);
  void receive(InducingPackage package);
  std::vector<InducingPackage> packages_in_order() const;
};

} // namespace commgp
