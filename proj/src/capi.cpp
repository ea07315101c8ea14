#include "commgp.h"

#include "commgp/experiment.hpp"
#include "commgp/wire.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <vector>

namespace {

thread_local std::string g_last_error;

void set_error(const std::string &message) { g_last_error = message; }

// Maps the C++ error hierarchy onto status codes; anything unexpected
// becomes COMMGP_ERR_INTERNAL rather than crossing the C boundary.
template <typename Fn> commgp_status wrap(Fn &&fn) {
  try {
    fn();
    return COMMGP_OK;
  } catch (const commgp::InvalidArgument &e) {
    set_error(e.what());
    return COMMGP_ERR_INVALID_ARGUMENT;
  } catch (const commgp::ParseError &e) {
    set_error(e.what());
    return COMMGP_ERR_PARSE;
  } catch (const commgp::IoError &e) {
    set_error(e.what());
    return COMMGP_ERR_IO;
  } catch (const commgp::NumericError &e) {
    set_error(e.what());
    return COMMGP_ERR_NUMERIC;
  } catch (const commgp::InsufficientData &e) {
    set_error(e.what());
    return COMMGP_ERR_INSUFFICIENT_DATA;
  } catch (const commgp::WireError &e) {
    set_error(e.what());
    return COMMGP_ERR_WIRE;
  } catch (const std::exception &e) {
    set_error(e.what());
    return COMMGP_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return COMMGP_ERR_INTERNAL;
  }
}

commgp_status require(bool condition, const char *message) {
  if (condition)
    return COMMGP_OK;
  set_error(message);
  return COMMGP_ERR_INVALID_ARGUMENT;
}

} // namespace

struct commgp_dataset {
  std::vector<commgp::CommEvent> events;
};

struct commgp_config {
  commgp::ExperimentConfig config;
};

struct commgp_result {
  std::string json;
  std::string table;
  std::string csv;
};

struct commgp_package {
  commgp::InducingPackage package;
};

struct commgp_fused {
  commgp::FusedPosterior fused;
};

extern "C" {

const char *commgp_version(void) { return "0.1.0"; }

const char *commgp_last_error(void) { return g_last_error.c_str(); }

const char *commgp_status_name(commgp_status status) {
  switch (status) {
  case COMMGP_OK:
    return "ok";
  case COMMGP_ERR_INVALID_ARGUMENT:
    return "invalid-argument";
  case COMMGP_ERR_IO:
    return "io-error";
  case COMMGP_ERR_PARSE:
    return "parse-error";
  case COMMGP_ERR_NUMERIC:
    return "numeric-error";
  case COMMGP_ERR_INSUFFICIENT_DATA:
    return "insufficient-data";
  case COMMGP_ERR_WIRE:
    return "wire-error";
  case COMMGP_ERR_INTERNAL:
    return "internal-error";
  }
  return "unknown";
}

commgp_status commgp_dataset_load_csv(const char *path, commgp_dataset **out) {
  if (auto st = require(path && out, "null argument"); st != COMMGP_OK)
    return st;
  return wrap([&] {
    auto handle = std::make_unique<commgp_dataset>();
    handle->events = commgp::ingest_csv_file(path);
    *out = handle.release();
  });
}

commgp_status commgp_dataset_synth(int n_agents, int rounds, double area_width,
                                   double area_height, int legs, int passes,
                                   int waypoints, double success_intercept,
                                   double success_slope, double noise,
                                   double noise_lengthscale, uint64_t seed,
                                   commgp_dataset **out) {
  if (auto st = require(out != nullptr, "null argument"); st != COMMGP_OK)
    return st;
  return wrap([&] {
    commgp::SynthSpec spec;
    spec.n_agents = n_agents;
    spec.rounds = rounds;
    spec.area_width = area_width;
    spec.area_height = area_height;
    spec.legs = legs;
    spec.passes = passes;
    spec.waypoints = waypoints;
    spec.success_intercept = success_intercept;
    spec.success_slope = success_slope;
    spec.noise = noise;
    spec.noise_lengthscale = noise_lengthscale;
    spec.seed = seed;
    auto handle = std::make_unique<commgp_dataset>();
    handle->events = commgp::synthesize_dataset(spec);
    *out = handle.release();
  });
}

commgp_status commgp_dataset_save_csv(const commgp_dataset *dataset,
                                      const char *path) {
  if (auto st = require(dataset && path, "null argument"); st != COMMGP_OK)
    return st;
  return wrap([&] { commgp::write_csv_file(path, dataset->events); });
}

size_t commgp_dataset_size(const commgp_dataset *dataset) {
  return dataset ? dataset->events.size() : 0;
}

int commgp_dataset_agent_count(const commgp_dataset *dataset) {
  if (!dataset)
    return 0;
  return static_cast<int>(commgp::agent_ids(dataset->events).size());
}

void commgp_dataset_destroy(commgp_dataset *dataset) { delete dataset; }

commgp_config *commgp_config_create(void) { return new (std::nothrow) commgp_config; }

void commgp_config_destroy(commgp_config *config) { delete config; }

#define COMMGP_CONFIG_SETTER(fn, field, value_expr, check, message)                  \
  commgp_status fn {                                                                 \
    if (auto st = require(config != nullptr, "null config"); st != COMMGP_OK)        \
      return st;                                                                     \
    if (auto st = require((check), message); st != COMMGP_OK)                        \
      return st;                                                                     \
    config->config.field = value_expr;                                               \
    return COMMGP_OK;                                                                \
  }

COMMGP_CONFIG_SETTER(commgp_config_set_lengthscale(commgp_config *config,
                                                   double lengthscale),
                     lengthscale, lengthscale, lengthscale > 0.0,
                     "lengthscale must be positive")
COMMGP_CONFIG_SETTER(commgp_config_set_region_radius(commgp_config *config,
                                                     double radius),
                     region_radius, radius, radius >= 0.0,
                     "region radius must be nonnegative")
COMMGP_CONFIG_SETTER(commgp_config_set_train_fraction(commgp_config *config,
                                                      double fraction),
                     train_fraction, fraction, fraction > 0.0 && fraction < 1.0,
                     "train fraction must lie in (0,1)")
COMMGP_CONFIG_SETTER(commgp_config_set_permutations(commgp_config *config,
                                                    int permutations),
                     permutations, permutations, permutations >= 1,
                     "permutations must be >= 1")
COMMGP_CONFIG_SETTER(commgp_config_set_gibbs_iterations(commgp_config *config,
                                                        int iterations),
                     gibbs_iterations, iterations, iterations >= 1,
                     "gibbs iterations must be >= 1")
COMMGP_CONFIG_SETTER(commgp_config_set_seed(commgp_config *config, uint64_t seed),
                     seed, seed, true, "")
COMMGP_CONFIG_SETTER(commgp_config_set_quadrature_order(commgp_config *config,
                                                        int order),
                     quadrature_order, order, order >= 5,
                     "quadrature order must be >= 5")
COMMGP_CONFIG_SETTER(commgp_config_set_threads(commgp_config *config, int threads),
                     threads, threads, threads >= 0,
                     "threads must be nonnegative")

#undef COMMGP_CONFIG_SETTER

commgp_status commgp_config_set_gibbs_mode(commgp_config *config, const char *mode) {
  if (auto st = require(config && mode, "null argument"); st != COMMGP_OK)
    return st;
  const std::string name(mode);
  if (name == "sampled")
    config->config.gibbs_mode = commgp::GibbsMode::Sampled;
  else if (name == "deterministic-mean")
    config->config.gibbs_mode = commgp::GibbsMode::DeterministicMean;
  else
    return require(false, "gibbs mode must be 'sampled' or 'deterministic-mean'");
  return COMMGP_OK;
}

commgp_status commgp_config_set_m_values(commgp_config *config, const int *m_values,
                                         size_t count) {
  if (auto st = require(config && m_values && count > 0, "null or empty m values");
      st != COMMGP_OK)
    return st;
  for (size_t i = 0; i < count; ++i)
    if (m_values[i] < 1)
      return require(false, "m values must be >= 1");
  config->config.m_values.assign(m_values, m_values + count);
  return COMMGP_OK;
}

commgp_status commgp_config_set_policies(commgp_config *config,
                                         const char *policies_csv) {
  if (auto st = require(config && policies_csv, "null argument"); st != COMMGP_OK)
    return st;
  return wrap([&] {
    std::vector<commgp::PolicyKind> policies;
    std::string token;
    for (const char *p = policies_csv;; ++p) {
      if (*p == ',' || *p == '\0') {
        if (!token.empty())
          policies.push_back(commgp::policy_from_string(token));
        token.clear();
        if (*p == '\0')
          break;
      } else if (!std::isspace(static_cast<unsigned char>(*p))) {
        token.push_back(*p);
      }
    }
    if (policies.empty())
      throw commgp::InvalidArgument("no policies given");
    config->config.policies = std::move(policies);
  });
}

commgp_status commgp_config_clear_centers(commgp_config *config) {
  if (auto st = require(config != nullptr, "null config"); st != COMMGP_OK)
    return st;
  config->config.centers.clear();
  return COMMGP_OK;
}

commgp_status commgp_config_add_center(commgp_config *config,
                                       const double center[4]) {
  if (auto st = require(config && center, "null argument"); st != COMMGP_OK)
    return st;
  config->config.centers.emplace_back(center[0], center[1], center[2], center[3]);
  return COMMGP_OK;
}

commgp_status commgp_run_local(const commgp_config *config,
                               const commgp_dataset *dataset, commgp_result **out) {
  if (auto st = require(config && dataset && out, "null argument"); st != COMMGP_OK)
    return st;
  return wrap([&] {
    const auto result = commgp::run_local_experiment(config->config, dataset->events);
    auto handle = std::make_unique<commgp_result>();
    handle->json = commgp::to_json(result, config->config);
    handle->table = commgp::to_table(result);
    handle->csv = commgp::to_csv(result);
    *out = handle.release();
  });
}

commgp_status commgp_run_decentralized(const commgp_config *config,
                                       const commgp_dataset *dataset,
                                       commgp_result **out) {
  if (auto st = require(config && dataset && out, "null argument"); st != COMMGP_OK)
    return st;
  return wrap([&] {
    const auto result =
        commgp::run_decentralized_experiment(config->config, dataset->events);
    auto handle = std::make_unique<commgp_result>();
    handle->json = commgp::to_json(result, config->config);
    handle->table = commgp::to_table(result);
    handle->csv = commgp::to_csv(result);
    *out = handle.release();
  });
}

const char *commgp_result_json(const commgp_result *result) {
  return result ? result->json.c_str() : "";
}

const char *commgp_result_table(const commgp_result *result) {
  return result ? result->table.c_str() : "";
}

const char *commgp_result_csv(const commgp_result *result) {
  return result ? result->csv.c_str() : "";
}

static commgp_status write_text(const std::string &text, const char *path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    set_error(std::string("cannot open '") + path + "' for writing");
    return COMMGP_ERR_IO;
  }
  out << text;
  if (!out) {
    set_error(std::string("failed writing '") + path + "'");
    return COMMGP_ERR_IO;
  }
  return COMMGP_OK;
}

commgp_status commgp_result_write_json(const commgp_result *result,
                                       const char *path) {
  if (auto st = require(result && path, "null argument"); st != COMMGP_OK)
    return st;
  return write_text(result->json, path);
}

commgp_status commgp_result_write_csv(const commgp_result *result, const char *path) {
  if (auto st = require(result && path, "null argument"); st != COMMGP_OK)
    return st;
  return write_text(result->csv, path);
}

void commgp_result_destroy(commgp_result *result) { delete result; }

commgp_status commgp_build_packages(const commgp_config *config,
                                    const commgp_dataset *dataset,
                                    const char *policy, int m,
                                    commgp_package ***out_packages,
                                    size_t *out_count) {
  if (auto st = require(config && dataset && policy && out_packages && out_count,
                        "null argument");
      st != COMMGP_OK)
    return st;
  return wrap([&] {
    std::vector<commgp::InducingPackage> packages;
    commgp::build_fused_full(config->config, dataset->events,
                             commgp::policy_from_string(policy), m, &packages);
    auto **handles = new commgp_package *[packages.size()];
    for (std::size_t i = 0; i < packages.size(); ++i)
      handles[i] = new commgp_package{std::move(packages[i])};
    *out_packages = handles;
    *out_count = packages.size();
  });
}

void commgp_package_destroy(commgp_package *package) { delete package; }

void commgp_packages_destroy(commgp_package **packages, size_t count) {
  if (!packages)
    return;
  for (size_t i = 0; i < count; ++i)
    delete packages[i];
  delete[] packages;
}

int commgp_package_agent(const commgp_package *package) {
  return package ? package->package.agent_id : -1;
}

int commgp_package_region(const commgp_package *package) {
  return package ? package->package.region_id : -1;
}

int commgp_package_m(const commgp_package *package) {
  return package ? package->package.m() : 0;
}

size_t commgp_package_encoded_size(const commgp_package *package) {
  if (!package)
    return 0;
  return commgp::encoded_package_size(package->package.m());
}

commgp_status commgp_package_encode(const commgp_package *package, uint8_t *buffer,
                                    size_t capacity, size_t *written) {
  if (auto st = require(package && buffer && written, "null argument");
      st != COMMGP_OK)
    return st;
  return wrap([&] {
    const auto bytes = commgp::encode_package(package->package);
    if (bytes.size() > capacity)
      throw commgp::InvalidArgument("encode buffer too small");
    std::memcpy(buffer, bytes.data(), bytes.size());
    *written = bytes.size();
  });
}

commgp_status commgp_package_decode(const uint8_t *bytes, size_t length,
                                    commgp_package **out) {
  if (auto st = require(bytes && out, "null argument"); st != COMMGP_OK)
    return st;
  return wrap([&] {
    auto handle = std::make_unique<commgp_package>();
    handle->package = commgp::decode_package({bytes, length});
    *out = handle.release();
  });
}

commgp_status commgp_package_file_write(const char *path,
                                        commgp_package *const *packages,
                                        size_t count) {
  if (auto st = require(path && packages, "null argument"); st != COMMGP_OK)
    return st;
  return wrap([&] {
    std::vector<commgp::InducingPackage> list;
    list.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      if (!packages[i])
        throw commgp::InvalidArgument("null package in list");
      list.push_back(packages[i]->package);
    }
    commgp::write_package_file(path, list);
  });
}

commgp_status commgp_package_file_read(const char *path,
                                       commgp_package ***out_packages,
                                       size_t *out_count) {
  if (auto st = require(path && out_packages && out_count, "null argument");
      st != COMMGP_OK)
    return st;
  return wrap([&] {
    auto list = commgp::read_package_file(path);
    auto **handles = new commgp_package *[list.size()];
    for (std::size_t i = 0; i < list.size(); ++i)
      handles[i] = new commgp_package{std::move(list[i])};
    *out_packages = handles;
    *out_count = list.size();
  });
}

commgp_status commgp_fuse(commgp_package *const *packages, size_t count,
                          commgp_fused **out) {
  if (auto st = require(packages && out && count > 0, "null or empty package list");
      st != COMMGP_OK)
    return st;
  return wrap([&] {
    std::vector<commgp::InducingPackage> list;
    list.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      if (!packages[i])
        throw commgp::InvalidArgument("null package in list");
      list.push_back(packages[i]->package);
    }
    auto handle = std::make_unique<commgp_fused>();
    handle->fused = commgp::fuse(std::move(list));
    *out = handle.release();
  });
}

size_t commgp_fused_dim(const commgp_fused *fused) {
  return fused ? static_cast<size_t>(fused->fused.mean.size()) : 0;
}

void commgp_fused_destroy(commgp_fused *fused) { delete fused; }

commgp_status commgp_fused_predict(const commgp_fused *fused,
                                   const commgp_config *config,
                                   const double x_std[4], double *prob,
                                   double *latent_mean, double *latent_var) {
  if (auto st = require(fused && config && x_std && prob, "null argument");
      st != COMMGP_OK)
    return st;
  return wrap([&] {
    const commgp::KernelParams params{config->config.lengthscale, 1.0};
    const commgp::Vector4d x(x_std[0], x_std[1], x_std[2], x_std[3]);
    const auto latent =
        commgp::fused_latent(x, fused->fused, params, config->config.jitter);
    *prob = commgp::predict_probability(latent.mean, latent.variance,
                                        config->config.quadrature_order);
    if (latent_mean)
      *latent_mean = latent.mean;
    if (latent_var)
      *latent_var = latent.variance;
  });
}

commgp_status commgp_emit_map_grid(const commgp_fused *fused,
                                   const commgp_config *config,
                                   const commgp_dataset *dataset,
                                   const char *fixed_end, double fixed_easting,
                                   double fixed_northing, double easting_min,
                                   double easting_max, int easting_cells,
                                   double northing_min, double northing_max,
                                   int northing_cells, const char *out_path) {
  if (auto st = require(fused && config && dataset && fixed_end && out_path,
                        "null argument");
      st != COMMGP_OK)
    return st;
  const std::string end(fixed_end);
  if (end != "tx" && end != "rx")
    return require(false, "fixed_end must be 'tx' or 'rx'");
  return wrap([&] {
    const auto st = commgp::fit_standardizer(dataset->events);
    commgp::GridSpec grid;
    grid.fixed_is_tx = end == "tx";
    grid.fixed_easting = fixed_easting;
    grid.fixed_northing = fixed_northing;
    grid.easting_min = easting_min;
    grid.easting_max = easting_max;
    grid.easting_cells = easting_cells;
    grid.northing_min = northing_min;
    grid.northing_max = northing_max;
    grid.northing_cells = northing_cells;
    const commgp::KernelParams params{config->config.lengthscale, 1.0};
    commgp::emit_map_grid(fused->fused, st, params, config->config.quadrature_order,
                          grid, out_path, config->config.jitter);
  });
}

} // extern "C"
