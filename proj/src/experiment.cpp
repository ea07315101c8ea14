#include "commgp/experiment.hpp"

#include "commgp/wire.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace commgp {

namespace {

using nlohmann::json;

constexpr std::uint64_t kFullDataTag = 0xf117da7aULL;

void parallel_for(int count, int threads, const std::function<void(int)> &body) {
  int n_threads = threads > 0 ? threads
                              : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, count));
  if (n_threads == 1) {
    for (int i = 0; i < count; ++i)
      body(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count)
        return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error)
          error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t)
    pool.emplace_back(worker);
  for (auto &t : pool)
    t.join();
  if (error)
    std::rethrow_exception(error);
}

struct AgentData {
  int agent_id = 0;
  std::vector<CommEvent> events;
  PointMatrix features; // standardized
  std::vector<int> labels;
  LocalityRegion region;
};

struct Prepared {
  Standardizer standardizer;
  std::vector<AgentData> agents;
};

Prepared prepare_agents(const ExperimentConfig &config,
                        const std::vector<CommEvent> &events) {
  config.validate();
  if (events.empty())
    throw InsufficientData("experiment: empty dataset");

  Prepared prep;
  prep.standardizer = fit_standardizer(events);

  const auto ids = agent_ids(events);
  if (!config.centers.empty() && config.centers.size() != ids.size())
    throw InvalidArgument("experiment: need exactly one region center per agent");

  for (std::size_t a = 0; a < ids.size(); ++a) {
    AgentData agent;
    agent.agent_id = ids[a];
    agent.events = events_for_agent(events, ids[a]);
    agent.features = standardized_features(agent.events, prep.standardizer);
    agent.labels.reserve(agent.events.size());
    for (const auto &e : agent.events)
      agent.labels.push_back(e.label);
    agent.region.radius = config.region_radius;
    agent.region.center = config.centers.empty()
                              ? medoid_center(agent.features)
                              : prep.standardizer.apply(config.centers[a]);
    prep.agents.push_back(std::move(agent));
  }
  return prep;
}

struct TrainedAgent {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
  PointMatrix train_features;
  std::vector<int> train_labels;
  PGState pg;
};

TrainedAgent train_agent(const ExperimentConfig &config, const AgentData &agent,
                         int permutation) {
  TrainedAgent trained;
  SplitPlan plan;
  plan.seed = mix_seed(config.seed, {static_cast<std::uint64_t>(agent.agent_id)});
  plan.train_fraction = config.train_fraction;
  plan.permutations = config.permutations;
  const Split split = permutation_split(agent.events.size(), plan, permutation);
  trained.train = split.train;
  trained.test = split.test;

  trained.train_features.resize(static_cast<Eigen::Index>(split.train.size()), 4);
  trained.train_labels.reserve(split.train.size());
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    trained.train_features.row(static_cast<Eigen::Index>(i)) =
        agent.features.row(split.train[i]);
    trained.train_labels.push_back(
        agent.labels[static_cast<std::size_t>(split.train[i])]);
  }

  KernelParams params{config.lengthscale, 1.0};
  Rng gibbs_rng = make_rng(config.seed,
                           {kStreamGibbs, static_cast<std::uint64_t>(agent.agent_id),
                            static_cast<std::uint64_t>(permutation)});
  trained.pg = gibbs_sample_w(trained.train_features, trained.train_labels, params,
                              config.gibbs_iterations, config.gibbs_mode, gibbs_rng,
                              config.jitter);
  return trained;
}

Rng policy_rng(const ExperimentConfig &config, int agent_id, std::uint64_t permutation,
               int m, PolicyKind policy) {
  return make_rng(config.seed,
                  {kStreamPolicy, static_cast<std::uint64_t>(agent_id), permutation,
                   static_cast<std::uint64_t>(m),
                   static_cast<std::uint64_t>(policy)});
}

void finalize_cell(PolicyCell &cell) {
  double acc = 0.0, nll = 0.0, trace = 0.0;
  int completed = 0, skipped = 0;
  for (const auto &row : cell.rows) {
    if (row.skipped) {
      ++skipped;
      continue;
    }
    ++completed;
    acc += row.acc;
    nll += row.nll;
    double t = 0.0;
    for (double x : row.traces)
      t += x;
    trace += row.traces.empty() ? 0.0 : t / static_cast<double>(row.traces.size());
  }
  cell.completed = completed;
  cell.skipped = skipped;
  cell.mean_acc = completed ? acc / completed : 0.0;
  cell.mean_nll = completed ? nll / completed : 0.0;
  cell.mean_trace = completed ? trace / completed : 0.0;
}

json config_json(const ExperimentConfig &config) {
  json centers = json::array();
  for (const auto &c : config.centers)
    centers.push_back({c[0], c[1], c[2], c[3]});
  json policies = json::array();
  for (const auto p : config.policies)
    policies.push_back(to_string(p));
  return json{{"lengthscale", config.lengthscale},
              {"region_radius", config.region_radius},
              {"centers", config.centers.empty() ? json("auto") : centers},
              {"m_values", config.m_values},
              {"policies", policies},
              {"permutations", config.permutations},
              {"train_fraction", config.train_fraction},
              {"gibbs_iterations", config.gibbs_iterations},
              {"gibbs_mode", config.gibbs_mode == GibbsMode::Sampled
                                 ? "sampled"
                                 : "deterministic-mean"},
              {"seed", config.seed},
              {"quadrature_order", config.quadrature_order},
              {"jitter", config.jitter}};
}

json cell_rows_json(const PolicyCell &cell) {
  json rows = json::array();
  for (const auto &row : cell.rows) {
    json r{{"permutation", row.permutation}};
    if (row.skipped) {
      r["skipped"] = true;
      r["reason"] = row.skip_reason;
    } else {
      r["acc"] = row.acc;
      r["nll"] = row.nll;
      r["n_test"] = row.n_test;
      r["traces"] = row.traces;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

json cells_json(const std::vector<PolicyCell> &cells) {
  json out = json::object();
  for (const auto &cell : cells) {
    json entry{{"per_permutation", cell_rows_json(cell)},
               {"mean_acc", cell.mean_acc},
               {"mean_nll", cell.mean_nll},
               {"mean_trace", cell.mean_trace},
               {"completed", cell.completed},
               {"skipped", cell.skipped}};
    out[to_string(cell.policy)][std::to_string(cell.m)] = std::move(entry);
  }
  return out;
}

std::string policy_label(PolicyKind policy, const char *verb,
                         const std::vector<int> &m_values) {
  static const char *kNumbers[] = {"zero", "one", "two",  "three", "four",
                                   "five", "six", "seven", "eight", "nine"};
  std::string label = std::string(to_string(policy));
  label[0] = static_cast<char>(std::toupper(label[0]));
  label += std::string(": ") + verb + " ";
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    if (i)
      label += " / ";
    label += m_values[i] >= 0 && m_values[i] <= 9
                 ? kNumbers[m_values[i]]
                 : std::to_string(m_values[i]);
  }
  return label;
}

void table_rows(std::ostringstream &out, const std::vector<PolicyCell> &cells,
                const std::vector<PolicyKind> &policies,
                const std::vector<int> &m_values, const char *verb) {
  out << std::left << std::setw(28) << "SGPC-PG" << std::setw(20) << "ACC"
      << "NLL\n";
  for (const auto policy : policies) {
    std::string accs, nlls;
    for (std::size_t i = 0; i < m_values.size(); ++i) {
      const auto it =
          std::find_if(cells.begin(), cells.end(), [&](const PolicyCell &c) {
            return c.policy == policy && c.m == m_values[i];
          });
      if (it == cells.end())
        continue;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", it->mean_acc);
      accs += (i ? " / " : "") + std::string(buf);
      std::snprintf(buf, sizeof buf, "%.4f", it->mean_nll);
      nlls += (i ? " / " : "") + std::string(buf);
    }
    out << std::left << std::setw(28) << policy_label(policy, verb, m_values)
        << std::setw(20) << accs << nlls << "\n";
  }
}

void csv_rows(std::ostringstream &out, const std::string &agent,
              const std::vector<PolicyCell> &cells) {
  for (const auto &cell : cells)
    for (const auto &row : cell.rows) {
      out << agent << ',' << to_string(cell.policy) << ',' << cell.m << ','
          << row.permutation << ',' << (row.skipped ? 1 : 0) << ',';
      if (row.skipped)
        out << ",,\n";
      else
        out << row.acc << ',' << row.nll << ',' << row.n_test << '\n';
    }
}

} // namespace

void ExperimentConfig::validate() const {
  KernelParams params{lengthscale, 1.0};
  params.validate();
  if (!(region_radius >= 0.0))
    throw InvalidArgument("config: region radius must be nonnegative");
  if (m_values.empty())
    throw InvalidArgument("config: no m values");
  for (int m : m_values)
    if (m < 1)
      throw InvalidArgument("config: m values must be >= 1");
  if (policies.empty())
    throw InvalidArgument("config: no policies");
  if (permutations < 1)
    throw InvalidArgument("config: permutations must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("config: train fraction must lie in (0,1)");
  if (gibbs_iterations < 1)
    throw InvalidArgument("config: gibbs iterations must be >= 1");
  if (quadrature_order < 5)
    throw InvalidArgument("config: quadrature order must be >= 5");
  if (!(jitter >= 0.0))
    throw InvalidArgument("config: jitter must be nonnegative");
}

std::vector<int> agent_ids(const std::vector<CommEvent> &events) {
  std::vector<int> ids;
  for (const auto &e : events)
    ids.push_back(e.rx_agent);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<CommEvent> events_for_agent(const std::vector<CommEvent> &events,
                                        int agent_id) {
  std::vector<CommEvent> out;
  for (const auto &e : events)
    if (e.rx_agent == agent_id)
      out.push_back(e);
  return out;
}

Vector4d medoid_center(const PointMatrix &features) {
  if (features.rows() == 0)
    throw InsufficientData("medoid_center: no points");
  Eigen::Index best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < features.rows(); ++j)
      sum += (features.row(i) - features.row(j)).norm();
    if (sum < best_sum) {
      best_sum = sum;
      best = i;
    }
  }
  return features.row(best);
}

LocalExperimentResult run_local_experiment(const ExperimentConfig &config,
                                           const std::vector<CommEvent> &events) {
  const Prepared prep = prepare_agents(config, events);
  const KernelParams params{config.lengthscale, 1.0};

  LocalExperimentResult result;
  result.agents.resize(prep.agents.size());
  for (std::size_t a = 0; a < prep.agents.size(); ++a) {
    result.agents[a].agent_id = prep.agents[a].agent_id;
    result.agents[a].n_events = static_cast<int>(prep.agents[a].events.size());
    for (const auto policy : config.policies)
      for (const int m : config.m_values) {
        PolicyCell cell;
        cell.policy = policy;
        cell.m = m;
        cell.rows.resize(static_cast<std::size_t>(config.permutations));
        result.agents[a].cells.push_back(std::move(cell));
      }
  }

  parallel_for(config.permutations, config.threads, [&](int perm) {
    for (std::size_t a = 0; a < prep.agents.size(); ++a) {
      const AgentData &agent = prep.agents[a];
      const TrainedAgent trained = train_agent(config, agent, perm);

      std::size_t cell_index = 0;
      for (const auto policy : config.policies)
        for (const int m : config.m_values) {
          PolicyCell &cell = result.agents[a].cells[cell_index++];
          PermutationOutcome &row = cell.rows[static_cast<std::size_t>(perm)];
          row.permutation = perm;
          try {
            Rng rng = policy_rng(config, agent.agent_id,
                                 static_cast<std::uint64_t>(perm), m, policy);
            const InducingPackage package = build_package(
                static_cast<std::uint16_t>(agent.agent_id), 0, trained.train_features,
                trained.train_labels, trained.pg, agent.region, m, policy, params,
                rng, config.jitter);

            // in-region slice of the training set, for the trace report
            const auto inside = region_filter(trained.train_features, agent.region);
            PointMatrix region_features(static_cast<Eigen::Index>(inside.size()), 4);
            for (std::size_t i = 0; i < inside.size(); ++i)
              region_features.row(static_cast<Eigen::Index>(i)) =
                  trained.train_features.row(inside[i]);
            row.traces = {trace_tilde(region_features, package.locations, params,
                                      config.jitter)};

            VariationalPosterior vp;
            vp.inducing_locations = package.locations;
            vp.mean = package.mean;
            vp.covariance = package.covariance;

            std::vector<double> probs;
            std::vector<int> labels;
            for (const auto ti : trained.test) {
              const Vector4d x = agent.features.row(ti);
              if (!agent.region.contains(x))
                continue;
              const LatentPrediction latent =
                  predict_latent(x, vp, params, config.jitter);
              probs.push_back(predict_probability(latent.mean, latent.variance,
                                                  config.quadrature_order));
              labels.push_back(agent.labels[static_cast<std::size_t>(ti)]);
            }
            if (probs.empty()) {
              row.skipped = true;
              row.skip_reason = "no test points in region";
              continue;
            }
            row.acc = accuracy(probs, labels);
            row.nll = negative_log_likelihood(probs, labels);
            row.n_test = static_cast<int>(probs.size());
          } catch (const InsufficientData &e) {
            row.skipped = true;
            row.skip_reason = e.what();
          }
        }
    }
  });

  for (auto &agent : result.agents)
    for (auto &cell : agent.cells)
      finalize_cell(cell);
  return result;
}

DecentralizedExperimentResult
run_decentralized_experiment(const ExperimentConfig &config,
                             const std::vector<CommEvent> &events) {
  const Prepared prep = prepare_agents(config, events);
  const KernelParams params{config.lengthscale, 1.0};

  DecentralizedExperimentResult result;
  for (const auto &agent : prep.agents)
    result.agent_ids.push_back(agent.agent_id);
  for (const auto policy : config.policies)
    for (const int m : config.m_values) {
      PolicyCell cell;
      cell.policy = policy;
      cell.m = m;
      cell.rows.resize(static_cast<std::size_t>(config.permutations));
      result.cells.push_back(std::move(cell));
    }
  for (const int m : config.m_values)
    result.package_bytes[m] = encoded_package_size(m);

  std::vector<int> excluded(static_cast<std::size_t>(config.permutations), 0);

  parallel_for(config.permutations, config.threads, [&](int perm) {
    std::vector<TrainedAgent> trained;
    trained.reserve(prep.agents.size());
    for (const auto &agent : prep.agents)
      trained.push_back(train_agent(config, agent, perm));

    std::size_t cell_index = 0;
    for (const auto policy : config.policies)
      for (const int m : config.m_values) {
        PolicyCell &cell = result.cells[cell_index++];
        PermutationOutcome &row = cell.rows[static_cast<std::size_t>(perm)];
        row.permutation = perm;
        try {
          std::vector<InducingPackage> packages;
          std::vector<double> traces;
          for (std::size_t a = 0; a < prep.agents.size(); ++a) {
            const AgentData &agent = prep.agents[a];
            Rng rng = policy_rng(config, agent.agent_id,
                                 static_cast<std::uint64_t>(perm), m, policy);
            packages.push_back(build_package(
                static_cast<std::uint16_t>(agent.agent_id), 0,
                trained[a].train_features, trained[a].train_labels, trained[a].pg,
                agent.region, m, policy, params, rng, config.jitter));

            const auto inside =
                region_filter(trained[a].train_features, agent.region);
            PointMatrix region_features(static_cast<Eigen::Index>(inside.size()), 4);
            for (std::size_t i = 0; i < inside.size(); ++i)
              region_features.row(static_cast<Eigen::Index>(i)) =
                  trained[a].train_features.row(inside[i]);
            traces.push_back(trace_tilde(region_features, packages.back().locations,
                                         params, config.jitter));
          }
          const FusedPosterior fused = fuse(std::move(packages));
          row.traces = traces;

          std::vector<double> probs;
          std::vector<int> labels;
          int outside = 0;
          for (std::size_t a = 0; a < prep.agents.size(); ++a) {
            const AgentData &agent = prep.agents[a];
            for (const auto ti : trained[a].test) {
              const Vector4d x = agent.features.row(ti);
              const bool in_any = std::any_of(
                  prep.agents.begin(), prep.agents.end(),
                  [&](const AgentData &other) { return other.region.contains(x); });
              if (!in_any) {
                ++outside;
                continue;
              }
              probs.push_back(decentralized_predict(x, fused, params,
                                                    config.quadrature_order,
                                                    config.jitter));
              labels.push_back(agent.labels[static_cast<std::size_t>(ti)]);
            }
          }
          if (cell_index == 1) // identical across cells; count once per permutation
            excluded[static_cast<std::size_t>(perm)] = outside;
          if (probs.empty()) {
            row.skipped = true;
            row.skip_reason = "no test points inside any region";
            continue;
          }
          row.acc = accuracy(probs, labels);
          row.nll = negative_log_likelihood(probs, labels);
          row.n_test = static_cast<int>(probs.size());
        } catch (const InsufficientData &e) {
          row.skipped = true;
          row.skip_reason = e.what();
        }
      }
  });

  for (auto &cell : result.cells)
    finalize_cell(cell);
  for (int n : excluded)
    result.excluded_test_points += n;
  return result;
}

FusedPosterior build_fused_full(const ExperimentConfig &config,
                                const std::vector<CommEvent> &events,
                                PolicyKind policy, int m,
                                std::vector<InducingPackage> *out_packages) {
  const Prepared prep = prepare_agents(config, events);
  const KernelParams params{config.lengthscale, 1.0};

  std::vector<InducingPackage> packages;
  for (const auto &agent : prep.agents) {
    Rng gibbs_rng = make_rng(config.seed,
                             {kStreamGibbs,
                              static_cast<std::uint64_t>(agent.agent_id), kFullDataTag});
    const PGState pg =
        gibbs_sample_w(agent.features, agent.labels, params, config.gibbs_iterations,
                       config.gibbs_mode, gibbs_rng, config.jitter);
    Rng rng = policy_rng(config, agent.agent_id, kFullDataTag, m, policy);
    packages.push_back(build_package(static_cast<std::uint16_t>(agent.agent_id), 0,
                                     agent.features, agent.labels, pg, agent.region,
                                     m, policy, params, rng, config.jitter));
  }
  if (out_packages)
    *out_packages = packages;
  return fuse(std::move(packages));
}

void emit_map_grid(const FusedPosterior &fused, const Standardizer &st,
                   const KernelParams &params, int quadrature_order,
                   const GridSpec &grid, const std::string &out_path, double jitter) {
  if (grid.easting_cells < 1 || grid.northing_cells < 1)
    throw InvalidArgument("emit_map_grid: grid must have at least one cell per axis");

  std::ofstream out(out_path);
  if (!out)
    throw IoError("cannot open '" + out_path + "' for writing");
  out << "easting,northing,p_success,latent_mean,latent_var\n";
  out.precision(10);

  auto coordinate = [](double lo, double hi, int cells, int i) {
    return cells == 1 ? lo : lo + (hi - lo) * i / (cells - 1);
  };

  for (int ie = 0; ie < grid.easting_cells; ++ie) {
    const double e = coordinate(grid.easting_min, grid.easting_max,
                                grid.easting_cells, ie);
    for (int in = 0; in < grid.northing_cells; ++in) {
      const double n = coordinate(grid.northing_min, grid.northing_max,
                                  grid.northing_cells, in);
      const Vector4d raw = grid.fixed_is_tx
                               ? Vector4d(grid.fixed_easting, grid.fixed_northing, e, n)
                               : Vector4d(e, n, grid.fixed_easting, grid.fixed_northing);
      const LatentPrediction latent =
          fused_latent(st.apply(raw), fused, params, jitter);
      const double p =
          predict_probability(latent.mean, latent.variance, quadrature_order);
      out << e << ',' << n << ',' << p << ',' << latent.mean << ','
          << latent.variance << '\n';
    }
  }
  if (!out)
    throw IoError("failed writing '" + out_path + "'");
}

std::string to_json(const LocalExperimentResult &result,
                    const ExperimentConfig &config) {
  json agents = json::array();
  for (const auto &agent : result.agents)
    agents.push_back(json{{"agent", agent.agent_id},
                          {"n_events", agent.n_events},
                          {"results", cells_json(agent.cells)}});
  const json doc{{"experiment", "local"},
                 {"config", config_json(config)},
                 {"agents", agents}};
  return doc.dump(2) + "\n";
}

std::string to_json(const DecentralizedExperimentResult &result,
                    const ExperimentConfig &config) {
  json bytes = json::object();
  for (const auto &[m, size] : result.package_bytes)
    bytes[std::to_string(m)] = size;
  const json doc{{"experiment", "decentralized"},
                 {"config", config_json(config)},
                 {"agents", result.agent_ids},
                 {"package_bytes", bytes},
                 {"excluded_test_points", result.excluded_test_points},
                 {"results", cells_json(result.cells)}};
  return doc.dump(2) + "\n";
}

std::string to_table(const LocalExperimentResult &result) {
  std::ostringstream out;
  for (const auto &agent : result.agents) {
    std::vector<PolicyKind> policies;
    std::vector<int> m_values;
    for (const auto &cell : agent.cells) {
      if (std::find(policies.begin(), policies.end(), cell.policy) == policies.end())
        policies.push_back(cell.policy);
      if (std::find(m_values.begin(), m_values.end(), cell.m) == m_values.end())
        m_values.push_back(cell.m);
    }
    out << "Agent " << agent.agent_id << " local data set (" << agent.n_events
        << " events)\n";
    table_rows(out, agent.cells, policies, m_values, "select");
    out << "\n";
  }
  return out.str();
}

std::string to_table(const DecentralizedExperimentResult &result) {
  std::ostringstream out;
  std::vector<PolicyKind> policies;
  std::vector<int> m_values;
  for (const auto &cell : result.cells) {
    if (std::find(policies.begin(), policies.end(), cell.policy) == policies.end())
      policies.push_back(cell.policy);
    if (std::find(m_values.begin(), m_values.end(), cell.m) == m_values.end())
      m_values.push_back(cell.m);
  }
  out << "Decentralized, " << result.agent_ids.size() << " agents\n";
  table_rows(out, result.cells, policies, m_values, "share");
  for (const auto &[m, size] : result.package_bytes)
    out << "package bytes (m=" << m << "): " << size << "\n";
  out << "test points outside every region: " << result.excluded_test_points << "\n";
  return out.str();
}

std::string to_csv(const LocalExperimentResult &result) {
  std::ostringstream out;
  out.precision(17);
  out << "agent,policy,m,permutation,skipped,acc,nll,n_test\n";
  for (const auto &agent : result.agents)
    csv_rows(out, std::to_string(agent.agent_id), agent.cells);
  return out.str();
}

std::string to_csv(const DecentralizedExperimentResult &result) {
  std::ostringstream out;
  out.precision(17);
  out << "agent,policy,m,permutation,skipped,acc,nll,n_test\n";
  csv_rows(out, "all", result.cells);
  return out.str();
}

} // namespace commgp
