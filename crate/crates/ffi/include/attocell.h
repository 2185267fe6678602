#ifndef ATTOCELL_H
#define ATTOCELL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AttocellStatus {
  ATTOCELL_STATUS_OK = 0,
  ATTOCELL_STATUS_NULL_POINTER = 1,
  ATTOCELL_STATUS_INVALID_ARGUMENT = 2,
  ATTOCELL_STATUS_NUMERICAL = 3,
  ATTOCELL_STATUS_BUFFER_TOO_SMALL = 4,
  ATTOCELL_STATUS_PANIC = 5,
} AttocellStatus;

typedef enum AttocellScheme {
  ATTOCELL_SCHEME_NPC = 0,
  ATTOCELL_SCHEME_MSPC = 1,
  ATTOCELL_SCHEME_ASPC = 2,
  ATTOCELL_SCHEME_ARPC = 3,
} AttocellScheme;

typedef enum AttocellPolicy {
  ATTOCELL_POLICY_UBS = 0,
  ATTOCELL_POLICY_CBS = 1,
} AttocellPolicy;

typedef struct AttocellConfig AttocellConfig;

typedef struct AttocellDistribution AttocellDistribution;

typedef struct AttocellTopology AttocellTopology;

// Per-UE access statistics of one attocell.
typedef struct AttocellStats {
  double gamma_min;
  double gamma_max;
  double mean_sinr;
  // bits/s
  double mean_rate;
  double rate_variance;
  double rate_min;
  double rate_max;
} AttocellStats;

typedef struct AttocellPowerControl {
  double k_min;
  double k_capped;
  // bits/s
  double backhaul_rate;
} AttocellPowerControl;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *attocell_last_error(void);

// Creates a configuration holding the default indoor parameters.
//
// # Safety
// `out_cfg` must be a valid pointer to writable storage for one handle.
enum AttocellStatus attocell_config_new_default(struct AttocellConfig **out_cfg);

// Parses a TOML configuration. Missing keys take defaults.
//
// # Safety
// `toml` must be a NUL-terminated string and `out_cfg` writable.
enum AttocellStatus attocell_config_from_toml(const char *toml, struct AttocellConfig **out_cfg);

// Sets the backhaul bandwidth to `ratio` times the access bandwidth.
//
// # Safety
// `cfg` must be a live handle.
enum AttocellStatus attocell_config_set_bandwidth_ratio(struct AttocellConfig *cfg, double ratio);

// # Safety
// `cfg` must be null or a handle not yet freed.
void attocell_config_free(struct AttocellConfig *cfg);

// Builds a six-branch super cell with `n_tiers` tiers.
//
// # Safety
// `out_topology` must be writable.
enum AttocellStatus attocell_topology_new(size_t n_tiers,
                                          double cell_radius,
                                          struct AttocellTopology **out_topology);

// # Safety
// `topology` must be a live handle.
size_t attocell_topology_n_bs_per_branch(const struct AttocellTopology *topology);

// Writes the backhaul path from the tier-1 station to `bs_index` into
// `buf`. `out_len` receives the path length even when `capacity` is too
// small, in which case `BufferTooSmall` is returned.
//
// # Safety
// `buf` must hold `capacity` elements (it may be null when `capacity` is 0).
enum AttocellStatus attocell_topology_path(const struct AttocellTopology *topology,
                                           size_t bs_index,
                                           size_t *buf,
                                           size_t capacity,
                                           size_t *out_len);

// # Safety
// `topology` must be null or a handle not yet freed.
void attocell_topology_free(struct AttocellTopology *topology);

// Builds the downlink SINR distribution of a single attocell.
//
// # Safety
// `cfg` must be a live handle and `out_dist` writable.
enum AttocellStatus attocell_distribution_new(const struct AttocellConfig *cfg,
                                              struct AttocellDistribution **out_dist);

// `P[gamma <= x]`.
//
// # Safety
// `dist` must be a live handle and `out_p` writable.
enum AttocellStatus attocell_distribution_cdf(const struct AttocellDistribution *dist,
                                              double x,
                                              double *out_p);

// # Safety
// `dist` must be a live handle and `out_stats` writable.
enum AttocellStatus attocell_distribution_statistics(const struct AttocellDistribution *dist,
                                                     struct AttocellStats *out_stats);

// # Safety
// `dist` must be null or a handle not yet freed.
void attocell_distribution_free(struct AttocellDistribution *dist);

// Bottleneck backhaul rate in bits/s at power ratio `k_b`.
//
// # Safety
// `cfg` must be a live handle and `out_rate` writable.
enum AttocellStatus attocell_backhaul_rate(const struct AttocellConfig *cfg,
                                           double k_b,
                                           double *out_rate);

// Fixed power-control coefficient of `scheme`.
//
// # Safety
// All pointers must be valid.
enum AttocellStatus attocell_power_control(enum AttocellScheme scheme,
                                           const struct AttocellConfig *cfg,
                                           const struct AttocellTopology *topology,
                                           const struct AttocellStats *stats,
                                           struct AttocellPowerControl *out_result);

// Analytic backhaul bottleneck probability for `m_ues` UEs per branch.
//
// # Safety
// All pointers must be valid.
enum AttocellStatus attocell_bbo_analytic(const struct AttocellConfig *cfg,
                                          const struct AttocellTopology *topology,
                                          const struct AttocellStats *stats,
                                          double k_b,
                                          size_t m_ues,
                                          double *out_p);

// Optimizes the bandwidth-sharing schedule with default solver settings.
//
// `rho` holds the normalized UE rates cell by cell; `counts[i]` is the
// number of UEs in cell `i`. The schedule is written to `out_mu`
// (`n_bs` entries) and the objective to `out_objective`.
//
// # Safety
// `counts` and `out_mu` must hold `n_bs` elements, `rho` the sum of `counts`.
enum AttocellStatus attocell_optimize_schedule(enum AttocellPolicy policy,
                                               const double *rho,
                                               const size_t *counts,
                                               size_t n_bs,
                                               double *out_mu,
                                               double *out_objective);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ATTOCELL_H */
