#pragma once

#include "commgp/data.hpp"
#include "commgp/fusion.hpp"
#include "commgp/policy.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace commgp {

struct ExperimentConfig {
  double lengthscale = 0.289;
  double region_radius = 0.4;
  // Raw-coordinate region centers, one per agent; empty means one per agent
  // at the medoid of its local data (standardized space).
  std::vector<Vector4d> centers;
  std::vector<int> m_values = {1, 2};
  std::vector<PolicyKind> policies = {PolicyKind::Good, PolicyKind::Random,
                                      PolicyKind::Bad};
  int permutations = 100;
  double train_fraction = 0.65;
  int gibbs_iterations = 100;
  GibbsMode gibbs_mode = GibbsMode::Sampled;
  std::uint64_t seed = 0;
  int quadrature_order = 61;
  double jitter = kDefaultJitter;
  int threads = 0; // 0 = hardware concurrency

  void validate() const;
};

struct PermutationOutcome {
  int permutation = 0;
  bool skipped = false;
  std::string skip_reason;
  double acc = 0.0;
  double nll = 0.0;
  int n_test = 0;
  std::vector<double> traces; // per agent, agent order
};

struct PolicyCell {
  PolicyKind policy = PolicyKind::Good;
  int m = 1;
  std::vector<PermutationOutcome> rows; // sorted by permutation index
  double mean_acc = 0.0;
  double mean_nll = 0.0;
  double mean_trace = 0.0;
  int completed = 0;
  int skipped = 0;
};

struct AgentLocalResult {
  int agent_id = 0;
  int n_events = 0;
  std::vector<PolicyCell> cells;
};

struct LocalExperimentResult {
  std::vector<AgentLocalResult> agents;
};

struct DecentralizedExperimentResult {
  std::vector<int> agent_ids;
  std::vector<PolicyCell> cells;
  std::map<int, std::size_t> package_bytes; // per m: bytes per package
  int excluded_test_points = 0;             // outside every region, summed
};

// Per agent, per permutation: split the agent's local data, Gibbs-sample w on
// the training slice, build one package per (policy, m) inside the agent's
// region, and score the in-region test points through that package.
LocalExperimentResult run_local_experiment(const ExperimentConfig &config,
                                           const std::vector<CommEvent> &events);

// Each agent builds one package for its region; packages are fused
// block-diagonally and every in-region test point (union over regions) is
// scored through the fused posterior.
DecentralizedExperimentResult
run_decentralized_experiment(const ExperimentConfig &config,
                             const std::vector<CommEvent> &events);

// Packages built from each agent's full local dataset (no split); feeds the
// map subcommand and package-file export.
FusedPosterior build_fused_full(const ExperimentConfig &config,
                                const std::vector<CommEvent> &events,
                                PolicyKind policy, int m,
                                std::vector<InducingPackage> *out_packages = nullptr);

struct GridSpec {
  bool fixed_is_tx = true;       // fixed transmitter, grid over receiver
  double fixed_easting = 0.0;    // raw meters
  double fixed_northing = 0.0;
  double easting_min = 0.0, easting_max = 0.0;
  int easting_cells = 0;
  double northing_min = 0.0, northing_max = 0.0;
  int northing_cells = 0;
};

// CSV of easting,northing,p_success,latent_mean,latent_var over the grid.
void emit_map_grid(const FusedPosterior &fused, const Standardizer &st,
                   const KernelParams &params, int quadrature_order,
                   const GridSpec &grid, const std::string &out_path,
                   double jitter = kDefaultJitter);

// Canonical serializations; byte-identical for identical (config, dataset).
std::string to_json(const LocalExperimentResult &result,
                    const ExperimentConfig &config);
std::string to_json(const DecentralizedExperimentResult &result,
                    const ExperimentConfig &config);
std::string to_table(const LocalExperimentResult &result);
std::string to_table(const DecentralizedExperimentResult &result);
std::string to_csv(const LocalExperimentResult &result);
std::string to_csv(const DecentralizedExperimentResult &result);

// Sorted distinct receiver ids; an agent's local data is what it received.
std::vector<int> agent_ids(const std::vector<CommEvent> &events);
std::vector<CommEvent> events_for_agent(const std::vector<CommEvent> &events,
                                        int agent_id);

// Medoid of the agent's standardized features; lowest index wins ties.
Vector4d medoid_center(const PointMatrix &features);

} // namespace commgp
