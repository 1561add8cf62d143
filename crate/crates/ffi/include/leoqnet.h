#ifndef LEOQNET_H
#define LEOQNET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  LQ_STATUS_OK = 0,
  LQ_STATUS_INVALID_ARGUMENT = 1,
  LQ_STATUS_NULL_POINTER = 2,
  LQ_STATUS_CONFIG = 3,
  LQ_STATUS_UNKNOWN_NODE = 4,
  LQ_STATUS_NUMERIC = 5,
  LQ_STATUS_BUFFER_TOO_SMALL = 6,
  LQ_STATUS_INTERNAL = 7,
  LQ_STATUS_PANIC = 99,
} LqStatus;

typedef enum {
  LQ_STRATEGY_STBD = 0,
  LQ_STRATEGY_BASELINE = 1,
} LqStrategy;

/**
 * Opaque routed-path handle.
 */
typedef struct LqPath LqPath;

/**
 * Opaque scenario handle.
 */
typedef struct LqScenario LqScenario;

typedef struct {
  double rate;
  double p_s;
  double p_b;
  double p_m;
  uint32_t modes;
  double t_bsm;
} LqProtocolParams;

typedef struct {
  double transmission_time;
  double drop_rate;
  double throughput;
  double mean_fidelity;
  bool path_found;
  /**
   * -1 when no path was found.
   */
  int64_t end_slot;
  size_t hop_count;
} LqMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *lq_last_error(void);

/**
 * SNR threshold matching a fidelity threshold in [1/4, 1).
 *
 * # Safety
 * `out` must be valid for writes.
 */
LqStatus lq_snr_threshold(double fidelity, double *out_value);

/**
 * Inter-satellite outage `P(h^2 < eta)` for `h^2 ~ Gamma(n/2, omega)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
LqStatus lq_outage_isl(double eta, uint32_t n, double omega, double *out_value);

/**
 * Downlink outage `P(h^2 Y < eta)` with gamma-gamma turbulence `Y`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
LqStatus lq_outage_downlink(double eta,
                            uint32_t n,
                            double omega,
                            double alpha,
                            double beta,
                            double *out_value);

/**
 * Writes the per-round repeater counts into `buf`. `len` always receives
 * the number of rounds; `LQ_STATUS_BUFFER_TOO_SMALL` is returned when
 * `capacity` is smaller.
 *
 * # Safety
 * `buf` must be valid for `capacity` writes (or NULL with `capacity == 0`);
 * `len` must be valid for writes.
 */
LqStatus lq_round_schedule(size_t n_repeater, size_t *buf, size_t capacity, size_t *len);

/**
 * Reference protocol parameters.
 */
LqProtocolParams lq_protocol_params_default(void);

/**
 * End-to-end success probability for a chain of `n_nodes`.
 *
 * # Safety
 * `params` must point to a valid struct and `out` be valid for writes.
 */
LqStatus lq_success_probability(size_t n_nodes, const LqProtocolParams *params, double *out_value);

/**
 * Built-in reference scenario.
 *
 * # Safety
 * `out` must be valid for writes.
 */
LqStatus lq_scenario_new_default(LqScenario **out_handle);

/**
 * Scenario from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` valid for writes.
 */
LqStatus lq_scenario_from_toml(const char *toml, LqScenario **out_handle);

/**
 * Overrides attempts per point and the seed.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
LqStatus lq_scenario_set_sampling(LqScenario *scenario, size_t attempts, uint64_t seed);

/**
 * Releases a scenario; NULL is ignored.
 *
 * # Safety
 * `scenario` must come from a constructor above and not be used afterwards.
 */
void lq_scenario_free(LqScenario *scenario);

/**
 * Runs one transmission time for one strategy.
 *
 * # Safety
 * `scenario` must be a live handle and `out` valid for writes.
 */
LqStatus lq_run_point(const LqScenario *scenario,
                      double t_start,
                      LqStrategy strategy,
                      LqMetrics *out_metrics);

/**
 * Best entanglement path within the coherence horizon. `*out` is set to
 * NULL when no path exists; that is not an error.
 *
 * # Safety
 * `scenario` must be a live handle, the names NUL-terminated strings and
 * `out` valid for writes.
 */
LqStatus lq_route(const LqScenario *scenario,
                  const char *source,
                  const char *destination,
                  double t_start,
                  LqPath **out_handle);

/**
 * Product of edge utilities along the path.
 *
 * # Safety
 * `path` must be a live handle and `out` valid for writes.
 */
LqStatus lq_path_utility(const LqPath *path, double *out_value);

/**
 * Number of entanglement links on the path.
 *
 * # Safety
 * `path` must be a live handle and `out` valid for writes.
 */
LqStatus lq_path_hop_count(const LqPath *path, size_t *out_value);

/**
 * Copies the text dump, NUL-terminated, into `buf`. `len` receives the dump
 * length without the terminator; `LQ_STATUS_BUFFER_TOO_SMALL` is returned
 * when `capacity <= len`.
 *
 * # Safety
 * `path` must be a live handle, `buf` valid for `capacity` writes and `len`
 * valid for writes.
 */
LqStatus lq_path_dump(const LqPath *path, char *buf, size_t capacity, size_t *len);

/**
 * Releases a path; NULL is ignored.
 *
 * # Safety
 * `path` must come from [`lq_route`] and not be used afterwards.
 */
void lq_path_free(LqPath *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEOQNET_H */
