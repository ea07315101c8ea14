// Command-line harness for the commgp shared library.  Everything here goes
// through the C API in commgp.h; the C++ core is not linked directly.

#include <commgp.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

struct DatasetDeleter {
  void operator()(commgp_dataset *p) const { commgp_dataset_destroy(p); }
};
struct ConfigDeleter {
  void operator()(commgp_config *p) const { commgp_config_destroy(p); }
};
struct ResultDeleter {
  void operator()(commgp_result *p) const { commgp_result_destroy(p); }
};
struct FusedDeleter {
  void operator()(commgp_fused *p) const { commgp_fused_destroy(p); }
};

using DatasetPtr = std::unique_ptr<commgp_dataset, DatasetDeleter>;
using ConfigPtr = std::unique_ptr<commgp_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<commgp_result, ResultDeleter>;
using FusedPtr = std::unique_ptr<commgp_fused, FusedDeleter>;

// machine-readable failure line on stderr, nonzero exit
[[noreturn]] void fail(commgp_status status) {
  std::string message = commgp_last_error();
  for (auto &c : message)
    if (c == '"' || c == '\n')
      c = '\'';
  std::fprintf(stderr, "{\"error\":\"%s\",\"message\":\"%s\"}\n",
               commgp_status_name(status), message.c_str());
  std::exit(1);
}

void check(commgp_status status) {
  if (status != COMMGP_OK)
    fail(status);
}

struct SynthFlags {
  int agents = 2;
  int rounds = 80;
  double width = 600.0;
  double height = 400.0;
  int legs = 5;
  int passes = 4;
  int waypoints = 48;
  double intercept = 2.0;
  double slope = 0.02;
  double noise = 0.0;
  double noise_lengthscale = 150.0;
  std::uint64_t seed = 1;

  void attach(CLI::App *cmd) {
    cmd->add_option("--agents", agents, "number of AUVs")->check(CLI::Range(2, 64));
    cmd->add_option("--rounds", rounds, "TDMA broadcast rounds");
    cmd->add_option("--width", width, "survey area width, meters");
    cmd->add_option("--height", height, "survey area height, meters");
    cmd->add_option("--legs", legs, "lawnmower legs per agent");
    cmd->add_option("--passes", passes, "lawnmower repetitions");
    cmd->add_option("--waypoints", waypoints,
                    "distinct joint configurations (0 = continuous)");
    cmd->add_option("--intercept", intercept, "logistic success intercept");
    cmd->add_option("--slope", slope, "logistic success slope per meter");
    cmd->add_option("--noise", noise, "spatial perturbation amplitude");
    cmd->add_option("--noise-lengthscale", noise_lengthscale,
                    "perturbation lengthscale, meters");
    cmd->add_option("--synth-seed", seed, "dataset generation seed");
  }

  DatasetPtr build() const {
    commgp_dataset *ds = nullptr;
    check(commgp_dataset_synth(agents, rounds, width, height, legs, passes,
                               waypoints, intercept, slope, noise,
                               noise_lengthscale, seed, &ds));
    return DatasetPtr(ds);
  }
};

struct ExperimentFlags {
  std::string data;
  SynthFlags synth;
  double lengthscale = 0.289;
  double radius = 0.4;
  std::vector<std::vector<double>> centers;
  std::vector<int> m_values = {1, 2};
  std::string policies = "good,random,bad";
  int permutations = 100;
  double train_fraction = 0.65;
  int gibbs_iterations = 100;
  std::string gibbs_mode = "sampled";
  std::uint64_t seed = 0;
  int quadrature = 61;
  int threads = 0;
  std::string json_out;
  std::string csv_out;

  void attach(CLI::App *cmd, bool with_synth = true) {
    cmd->add_option("--data", data, "communication events CSV");
    if (with_synth)
      synth.attach(cmd);
    cmd->add_option("--lengthscale", lengthscale, "kernel lengthscale (standardized)");
    cmd->add_option("--radius", radius, "locality region radius (standardized)");
    cmd->add_option("--center", centers,
                    "region center tx_e tx_n rx_e rx_n (raw meters); one per agent, "
                    "repeatable; omit for per-agent medoids")
        ->expected(-1)
        ->type_size(4);
    cmd->add_option("--m", m_values, "inducing points per package (repeatable)");
    cmd->add_option("--policies", policies, "comma-separated: good,random,bad");
    cmd->add_option("--permutations", permutations, "train/test permutations");
    cmd->add_option("--train-fraction", train_fraction, "training fraction");
    cmd->add_option("--gibbs-iterations", gibbs_iterations, "Gibbs sweeps for w");
    cmd->add_option("--gibbs-mode", gibbs_mode, "sampled | deterministic-mean");
    cmd->add_option("--seed", seed, "experiment seed");
    cmd->add_option("--quadrature", quadrature, "Gauss-Hermite order");
    cmd->add_option("--threads", threads, "worker threads (0 = auto)");
    cmd->add_option("--json", json_out, "write machine-readable results here");
    cmd->add_option("--csv", csv_out, "write per-permutation CSV here");
  }

  DatasetPtr dataset() const {
    if (!data.empty()) {
      commgp_dataset *ds = nullptr;
      check(commgp_dataset_load_csv(data.c_str(), &ds));
      return DatasetPtr(ds);
    }
    return synth.build();
  }

  ConfigPtr config() const {
    ConfigPtr cfg(commgp_config_create());
    if (!cfg)
      fail(COMMGP_ERR_INTERNAL);
    check(commgp_config_set_lengthscale(cfg.get(), lengthscale));
    check(commgp_config_set_region_radius(cfg.get(), radius));
    check(commgp_config_set_train_fraction(cfg.get(), train_fraction));
    check(commgp_config_set_permutations(cfg.get(), permutations));
    check(commgp_config_set_gibbs_iterations(cfg.get(), gibbs_iterations));
    check(commgp_config_set_gibbs_mode(cfg.get(), gibbs_mode.c_str()));
    check(commgp_config_set_seed(cfg.get(), seed));
    check(commgp_config_set_quadrature_order(cfg.get(), quadrature));
    check(commgp_config_set_threads(cfg.get(), threads));
    check(commgp_config_set_m_values(cfg.get(), m_values.data(), m_values.size()));
    check(commgp_config_set_policies(cfg.get(), policies.c_str()));
    check(commgp_config_clear_centers(cfg.get()));
    for (const auto &c : centers) {
      const double center[4] = {c[0], c[1], c[2], c[3]};
      check(commgp_config_add_center(cfg.get(), center));
    }
    return cfg;
  }

  void emit(const ResultPtr &result) const {
    std::fputs(commgp_result_table(result.get()), stdout);
    if (!json_out.empty())
      check(commgp_result_write_json(result.get(), json_out.c_str()));
    if (!csv_out.empty())
      check(commgp_result_write_csv(result.get(), csv_out.c_str()));
  }
};

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"decentralized sparse GP classification of communication success"};
  app.require_subcommand(1);

  // synth: generate a dataset CSV
  auto *synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset CSV");
  SynthFlags synth_flags;
  synth_flags.attach(synth_cmd);
  std::string synth_out = "events.csv";
  synth_cmd->add_option("--out", synth_out, "output CSV path");

  // local: per-agent inducing point selection inside locality regions
  auto *local_cmd =
      app.add_subcommand("local", "per-agent selection and in-region evaluation");
  ExperimentFlags local_flags;
  local_flags.attach(local_cmd);

  // decentralized: share packages, fuse, predict across regions
  auto *dec_cmd = app.add_subcommand(
      "decentralized", "share packages across agents and evaluate the fused map");
  ExperimentFlags dec_flags;
  dec_flags.attach(dec_cmd);

  // map: emit a prediction grid from fused full-data packages
  auto *map_cmd =
      app.add_subcommand("map", "emit a communication-probability grid CSV");
  ExperimentFlags map_flags;
  map_flags.attach(map_cmd);
  std::string map_policy = "good";
  int map_m = 2;
  std::string fixed_end = "tx";
  std::vector<double> fixed_pos = {0.0, 0.0};
  std::vector<double> grid_e = {0.0, 600.0};
  std::vector<double> grid_n = {0.0, 400.0};
  int cells_e = 40, cells_n = 40;
  std::string map_out = "map.csv";
  std::string packages_out, packages_in;
  map_cmd->add_option("--policy", map_policy, "good | random | bad");
  map_cmd->add_option("--map-m", map_m, "inducing points per package");
  map_cmd->add_option("--fixed", fixed_end, "which end is fixed: tx | rx");
  map_cmd->add_option("--fixed-pos", fixed_pos, "fixed end easting northing (meters)")
      ->expected(2);
  map_cmd->add_option("--grid-e", grid_e, "easting range: min max")->expected(2);
  map_cmd->add_option("--grid-n", grid_n, "northing range: min max")->expected(2);
  map_cmd->add_option("--cells-e", cells_e, "easting grid cells");
  map_cmd->add_option("--cells-n", cells_n, "northing grid cells");
  map_cmd->add_option("--out", map_out, "output grid CSV path");
  map_cmd->add_option("--packages-out", packages_out,
                      "also write the encoded packages to this file");
  map_cmd->add_option("--packages-in", packages_in,
                      "fuse packages from this file instead of building them");

  CLI11_PARSE(app, argc, argv);

  if (synth_cmd->parsed()) {
    const DatasetPtr ds = synth_flags.build();
    check(commgp_dataset_save_csv(ds.get(), synth_out.c_str()));
    std::printf("wrote %zu events (%d agents) to %s\n", commgp_dataset_size(ds.get()),
                commgp_dataset_agent_count(ds.get()), synth_out.c_str());
    return 0;
  }

  if (local_cmd->parsed()) {
    const DatasetPtr ds = local_flags.dataset();
    const ConfigPtr cfg = local_flags.config();
    commgp_result *result = nullptr;
    check(commgp_run_local(cfg.get(), ds.get(), &result));
    local_flags.emit(ResultPtr(result));
    return 0;
  }

  if (dec_cmd->parsed()) {
    const DatasetPtr ds = dec_flags.dataset();
    const ConfigPtr cfg = dec_flags.config();
    commgp_result *result = nullptr;
    check(commgp_run_decentralized(cfg.get(), ds.get(), &result));
    dec_flags.emit(ResultPtr(result));
    return 0;
  }

  if (map_cmd->parsed()) {
    const DatasetPtr ds = map_flags.dataset();
    const ConfigPtr cfg = map_flags.config();

    commgp_package **packages = nullptr;
    size_t count = 0;
    if (!packages_in.empty())
      check(commgp_package_file_read(packages_in.c_str(), &packages, &count));
    else
      check(commgp_build_packages(cfg.get(), ds.get(), map_policy.c_str(), map_m,
                                  &packages, &count));
    if (!packages_out.empty())
      check(commgp_package_file_write(packages_out.c_str(), packages, count));

    commgp_fused *fused = nullptr;
    const commgp_status fuse_status = commgp_fuse(packages, count, &fused);
    if (fuse_status != COMMGP_OK) {
      commgp_packages_destroy(packages, count);
      fail(fuse_status);
    }
    FusedPtr fused_ptr(fused);

    const commgp_status grid_status = commgp_emit_map_grid(
        fused, cfg.get(), ds.get(), fixed_end.c_str(), fixed_pos[0], fixed_pos[1],
        grid_e[0], grid_e[1], cells_e, grid_n[0], grid_n[1], cells_n,
        map_out.c_str());
    commgp_packages_destroy(packages, count);
    check(grid_status);
    std::printf("wrote %dx%d grid to %s (fused dim %zu)\n", cells_e, cells_n,
                map_out.c_str(), commgp_fused_dim(fused_ptr.get()));
    return 0;
  }

  return 0;
}
