#include "commgp/fusion.hpp"

#include <algorithm>

namespace commgp {

FusedPosterior fuse(std::vector<InducingPackage> packages) {
  if (packages.empty())
    throw InvalidArgument("fuse: empty package list");

  std::stable_sort(packages.begin(), packages.end(),
                   [](const InducingPackage &a, const InducingPackage &b) {
                     return std::make_pair(a.agent_id, a.region_id) <
                            std::make_pair(b.agent_id, b.region_id);
                   });
  for (std::size_t i = 1; i < packages.size(); ++i)
    if (packages[i].agent_id == packages[i - 1].agent_id &&
        packages[i].region_id == packages[i - 1].region_id)
      throw InvalidArgument("fuse: duplicate (agent, region) package key");

  Eigen::Index total = 0;
  for (const auto &p : packages) {
    if (p.m() < 1 || p.mean.size() != p.m() || p.covariance.rows() != p.m() ||
        p.covariance.cols() != p.m())
      throw InvalidArgument("fuse: malformed package");
    total += p.m();
  }

  FusedPosterior fused;
  fused.locations.resize(total, 4);
  fused.mean.resize(total);
  fused.covariance = MatrixXd::Zero(total, total);
  Eigen::Index offset = 0;
  for (const auto &p : packages) {
    const Eigen::Index m = p.m();
    fused.locations.block(offset, 0, m, 4) = p.locations;
    fused.mean.segment(offset, m) = p.mean;
    fused.covariance.block(offset, offset, m, m) = p.covariance;
    fused.keys.emplace_back(p.agent_id, p.region_id);
    fused.block_sizes.push_back(static_cast<int>(m));
    offset += m;
  }
  return fused;
}

LatentPrediction fused_latent(const Vector4d &x_star, const FusedPosterior &fused,
                              const KernelParams &params, double jitter) {
  VariationalPosterior vp;
  vp.inducing_locations = fused.locations;
  vp.mean = fused.mean;
  vp.covariance = fused.covariance;
  return predict_latent(x_star, vp, params, jitter);
}

double decentralized_predict(const Vector4d &x_star, const FusedPosterior &fused,
                             const KernelParams &params, int quadrature_order,
                             double jitter) {
  const LatentPrediction latent = fused_latent(x_star, fused, params, jitter);
  return predict_probability(latent.mean, latent.variance, quadrature_order);
}

void AgentState::add_event(const CommEvent &event) {
  if (event.rx_agent != static_cast<int>(agent_id))
    throw InvalidArgument("AgentState: local events must have this agent as receiver");
  local_events.push_back(event);
}

void AgentState::receive(InducingPackage package) {
  const auto key = std::make_pair(package.agent_id, package.region_id);
  received[key] = std::move(package); // last writer wins
}

std::vector<InducingPackage> AgentState::packages_in_order() const {
  std::vector<InducingPackage> out;
  out.reserve(received.size());
  for (const auto &[key, package] : received)
    out.push_back(package);
  return out;
}

} // namespace commgp
