/*
 * C API for the commgp shared library: decentralized sparse Gaussian-process
 * classification of communication success.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return COMMGP_OK on success; on failure they return a status code
 * and leave a human-readable message retrievable with commgp_last_error()
 * (thread-local, valid until the next failing call on the same thread).
 */
#ifndef COMMGP_H
#define COMMGP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define COMMGP_API __declspec(dllexport)
#else
#define COMMGP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum commgp_status {
  COMMGP_OK = 0,
  COMMGP_ERR_INVALID_ARGUMENT = 1,
  COMMGP_ERR_IO = 2,
  COMMGP_ERR_PARSE = 3,
  COMMGP_ERR_NUMERIC = 4,
  COMMGP_ERR_INSUFFICIENT_DATA = 5,
  COMMGP_ERR_WIRE = 6,
  COMMGP_ERR_INTERNAL = 7
} commgp_status;

COMMGP_API const char *commgp_version(void);
COMMGP_API const char *commgp_status_name(commgp_status status);
COMMGP_API const char *commgp_last_error(void);

typedef struct commgp_dataset commgp_dataset;
typedef struct commgp_config commgp_config;
typedef struct commgp_result commgp_result;
typedef struct commgp_package commgp_package;
typedef struct commgp_fused commgp_fused;

/* ---- datasets ---------------------------------------------------------- */

COMMGP_API commgp_status commgp_dataset_load_csv(const char *path,
                                                 commgp_dataset **out);

COMMGP_API commgp_status commgp_dataset_synth(
    int n_agents, int rounds, double area_width, double area_height, int legs,
    int passes, int waypoints, double success_intercept, double success_slope,
    double noise, double noise_lengthscale, uint64_t seed, commgp_dataset **out);

COMMGP_API commgp_status commgp_dataset_save_csv(const commgp_dataset *dataset,
                                                 const char *path);
COMMGP_API size_t commgp_dataset_size(const commgp_dataset *dataset);
COMMGP_API int commgp_dataset_agent_count(const commgp_dataset *dataset);
COMMGP_API void commgp_dataset_destroy(commgp_dataset *dataset);

/* ---- experiment configuration ------------------------------------------ */

COMMGP_API commgp_config *commgp_config_create(void);
COMMGP_API void commgp_config_destroy(commgp_config *config);

COMMGP_API commgp_status commgp_config_set_lengthscale(commgp_config *config,
                                                       double lengthscale);
COMMGP_API commgp_status commgp_config_set_region_radius(commgp_config *config,
                                                         double radius);
COMMGP_API commgp_status commgp_config_set_train_fraction(commgp_config *config,
                                                          double fraction);
COMMGP_API commgp_status commgp_config_set_permutations(commgp_config *config,
                                                        int permutations);
COMMGP_API commgp_status commgp_config_set_gibbs_iterations(commgp_config *config,
                                                            int iterations);
/* mode: "sampled" or "deterministic-mean" */
COMMGP_API commgp_status commgp_config_set_gibbs_mode(commgp_config *config,
                                                      const char *mode);
COMMGP_API commgp_status commgp_config_set_seed(commgp_config *config,
                                                uint64_t seed);
COMMGP_API commgp_status commgp_config_set_quadrature_order(commgp_config *config,
                                                            int order);
COMMGP_API commgp_status commgp_config_set_threads(commgp_config *config,
                                                   int threads);
COMMGP_API commgp_status commgp_config_set_m_values(commgp_config *config,
                                                    const int *m_values,
                                                    size_t count);
/* comma-separated subset of good,random,bad */
COMMGP_API commgp_status commgp_config_set_policies(commgp_config *config,
                                                    const char *policies_csv);
COMMGP_API commgp_status commgp_config_clear_centers(commgp_config *config);
/* raw-coordinate center [tx_e, tx_n, rx_e, rx_n]; one per agent when used */
COMMGP_API commgp_status commgp_config_add_center(commgp_config *config,
                                                  const double center[4]);

/* ---- experiments -------------------------------------------------------- */

COMMGP_API commgp_status commgp_run_local(const commgp_config *config,
                                          const commgp_dataset *dataset,
                                          commgp_result **out);
COMMGP_API commgp_status commgp_run_decentralized(const commgp_config *config,
                                                  const commgp_dataset *dataset,
                                                  commgp_result **out);

/* Owned by the result handle; valid until the handle is destroyed. */
COMMGP_API const char *commgp_result_json(const commgp_result *result);
COMMGP_API const char *commgp_result_table(const commgp_result *result);
COMMGP_API const char *commgp_result_csv(const commgp_result *result);
COMMGP_API commgp_status commgp_result_write_json(const commgp_result *result,
                                                  const char *path);
COMMGP_API commgp_status commgp_result_write_csv(const commgp_result *result,
                                                 const char *path);
COMMGP_API void commgp_result_destroy(commgp_result *result);

/* ---- packages, fusion, prediction --------------------------------------- */

/* One package per agent from its full local dataset (no train/test split). */
COMMGP_API commgp_status commgp_build_packages(const commgp_config *config,
                                               const commgp_dataset *dataset,
                                               const char *policy, int m,
                                               commgp_package ***out_packages,
                                               size_t *out_count);
COMMGP_API void commgp_package_destroy(commgp_package *package);
COMMGP_API void commgp_packages_destroy(commgp_package **packages, size_t count);

COMMGP_API int commgp_package_agent(const commgp_package *package);
COMMGP_API int commgp_package_region(const commgp_package *package);
COMMGP_API int commgp_package_m(const commgp_package *package);

COMMGP_API size_t commgp_package_encoded_size(const commgp_package *package);
COMMGP_API commgp_status commgp_package_encode(const commgp_package *package,
                                               uint8_t *buffer, size_t capacity,
                                               size_t *written);
COMMGP_API commgp_status commgp_package_decode(const uint8_t *bytes, size_t length,
                                               commgp_package **out);

COMMGP_API commgp_status commgp_package_file_write(const char *path,
                                                   commgp_package *const *packages,
                                                   size_t count);
COMMGP_API commgp_status commgp_package_file_read(const char *path,
                                                  commgp_package ***out_packages,
                                                  size_t *out_count);

COMMGP_API commgp_status commgp_fuse(commgp_package *const *packages, size_t count,
                                     commgp_fused **out);
COMMGP_API size_t commgp_fused_dim(const commgp_fused *fused);
COMMGP_API void commgp_fused_destroy(commgp_fused *fused);

/* x_std is a standardized feature vector [tx_e, tx_n, rx_e, rx_n]. */
COMMGP_API commgp_status commgp_fused_predict(const commgp_fused *fused,
                                              const commgp_config *config,
                                              const double x_std[4], double *prob,
                                              double *latent_mean,
                                              double *latent_var);

/* Grid coordinates are raw meters; the dataset supplies the standardizer.
 * fixed_end is "tx" or "rx". */
COMMGP_API commgp_status commgp_emit_map_grid(
    const commgp_fused *fused, const commgp_config *config,
    const commgp_dataset *dataset, const char *fixed_end, double fixed_easting,
    double fixed_northing, double easting_min, double easting_max,
    int easting_cells, double northing_min, double northing_max,
    int northing_cells, const char *out_path);

#ifdef __cplusplus
}
#endif

#endif /* COMMGP_H */
