#ifndef NLVOTER_H
#define NLVOTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NlvStatus {
  NLV_STATUS_OK = 0,
  NLV_STATUS_NULL_POINTER = 1,
  NLV_STATUS_INVALID_ARGUMENT = 2,
  NLV_STATUS_GRAPH_PARAMS = 3,
  NLV_STATUS_ALPHA_RANGE = 4,
  NLV_STATUS_LENGTH_MISMATCH = 5,
  NLV_STATUS_INVALID_STATE = 6,
  NLV_STATUS_BUFFER_TOO_SMALL = 7,
  NLV_STATUS_MEAN_FIELD = 8,
  NLV_STATUS_PANIC = 99,
} NlvStatus;

/**
 * Immutable graph. Simulations share it, so it may be freed while they live.
 */
typedef struct NlvGraph NlvGraph;

/**
 * One opinion configuration evolving on a graph with its own random stream.
 */
typedef struct NlvSim NlvSim;

typedef struct NlvDegreeStats {
  double mean_degree;
  size_t min_degree;
  size_t max_degree;
  size_t component_count;
} NlvDegreeStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *nlv_last_error_message(void);

/**
 * Periodic `side × side` square lattice.
 */
enum NlvStatus nlv_graph_lattice(size_t side, struct NlvGraph **out);

/**
 * Giant component of G(n, k_avg / (n − 1)).
 */
enum NlvStatus nlv_graph_er(size_t n, double k_avg, uint64_t seed, struct NlvGraph **out);

/**
 * Ring of even degree `ring_degree` plus shortcuts added with probability
 * `shortcut_prob` per ring edge.
 */
enum NlvStatus nlv_graph_nw(size_t n,
                            size_t ring_degree,
                            double shortcut_prob,
                            uint64_t seed,
                            struct NlvGraph **out);

/**
 * Preferential attachment with `m` links per new node.
 */
enum NlvStatus nlv_graph_ba(size_t n, size_t m, uint64_t seed, struct NlvGraph **out);

/**
 * Builds from a topology string such as `"er:N=1000,k=4"`. With the same
 * seed this is the first graph a CLI sweep would sample.
 */
enum NlvStatus nlv_graph_from_spec(const char *spec, uint64_t seed, struct NlvGraph **out);

/**
 * Node count, or 0 for a null handle.
 */
size_t nlv_graph_node_count(const struct NlvGraph *graph);

enum NlvStatus nlv_graph_degree_stats(const struct NlvGraph *graph, struct NlvDegreeStats *out);

void nlv_graph_free(struct NlvGraph *graph);

/**
 * Probability of adopting `+1` given the neighbourhood counts (agent
 * included). `alpha = +INFINITY` selects the majority rule.
 */
enum NlvStatus nlv_select_prob(uint32_t n_plus, uint32_t n_minus, double alpha, double *out);

/**
 * New simulation with a uniformly random initial state. The dynamics
 * stream matches the CLI `run` subcommand for the same seed.
 */
enum NlvStatus nlv_sim_new(const struct NlvGraph *graph,
                           double alpha,
                           uint64_t seed,
                           struct NlvSim **out);

size_t nlv_sim_node_count(const struct NlvSim *sim);

/**
 * Completed synchronous steps, or 0 for a null handle.
 */
uint64_t nlv_sim_time_step(const struct NlvSim *sim);

/**
 * Advances by `steps` synchronous updates.
 */
enum NlvStatus nlv_sim_step(struct NlvSim *sim, uint64_t steps);

/**
 * Copies the opinions (+1 / −1) into `buf`, which must hold at least
 * `nlv_sim_node_count` entries.
 */
enum NlvStatus nlv_sim_opinions(const struct NlvSim *sim, int8_t *buf, size_t len);

/**
 * Replaces the state with `len` values of +1 / −1 and resets the clock.
 * The random stream carries on from where it was.
 */
enum NlvStatus nlv_sim_set_opinions(struct NlvSim *sim, const int8_t *values, size_t len);

/**
 * Order parameter |Σσ| / N; NaN for a null handle.
 */
double nlv_sim_eta(const struct NlvSim *sim);

/**
 * Fraction of `+1` agents; NaN for a null handle.
 */
double nlv_sim_rho_plus(const struct NlvSim *sim);

bool nlv_sim_is_consensus(const struct NlvSim *sim);

/**
 * Number of same-opinion clusters and the largest one's share of the nodes.
 */
enum NlvStatus nlv_sim_clusters(const struct NlvSim *sim, size_t *count, double *largest_fraction);

/**
 * Steps until consensus or until `max_steps` more steps have run.
 * `reached` tells which; `time` receives the clock value at exit.
 */
enum NlvStatus nlv_sim_run_to_consensus(struct NlvSim *sim,
                                        uint64_t max_steps,
                                        uint64_t *time,
                                        bool *reached);

void nlv_sim_free(struct NlvSim *sim);

/**
 * Mean-field rate dρ/dt at `rho`.
 */
enum NlvStatus nlv_mf_rhs(double rho, double alpha, double *out);

/**
 * RK4 trajectory sampled at `i · dt`. `written` always receives the number
 * of samples; if `len` is smaller nothing is copied and
 * `NLV_STATUS_BUFFER_TOO_SMALL` is returned.
 */
enum NlvStatus nlv_mf_integrate(double rho0,
                                double alpha,
                                double dt,
                                double t_max,
                                double *rho,
                                size_t len,
                                size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLVOTER_H */
