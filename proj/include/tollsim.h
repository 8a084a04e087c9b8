/* C interface to the tollsim engine.
 *
 * All entry points return a tollsim_status; non-zero means failure and
 * tollsim_last_error() describes it (thread-local). Objects returned
 * through out-parameters are owned by the caller and released with the
 * matching _free function; strings with tollsim_string_free.
 */
#ifndef TOLLSIM_H
#define TOLLSIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tollsim_status {
    TOLLSIM_OK = 0,
    TOLLSIM_ERR_INVALID = 1,  /* bad arguments or config */
    TOLLSIM_ERR_PARSE = 2,    /* malformed input file */
    TOLLSIM_ERR_IO = 3,       /* file system failure */
    TOLLSIM_ERR_CRITERIA = 4, /* verification checks failed */
    TOLLSIM_ERR_INTERNAL = 5
} tollsim_status;

typedef struct tollsim_network tollsim_network;
typedef struct tollsim_scenario tollsim_scenario;

const char* tollsim_version(void);

/* Message for the most recent failure on this thread. */
const char* tollsim_last_error(void);

void tollsim_string_free(char* s);

/* --- Networks ------------------------------------------------------- */

tollsim_status tollsim_network_load_tntp(const char* net_text, const char* trips_text,
                                         tollsim_network** out);
tollsim_status tollsim_network_load_tntp_files(const char* net_path, const char* trips_path,
                                               tollsim_network** out);
void tollsim_network_free(tollsim_network* net);

tollsim_status tollsim_network_counts(const tollsim_network* net, int32_t* nodes,
                                      int32_t* edges, int32_t* od_pairs);

/* Minimum-cost simple path between 0-based nodes. edge_costs may be NULL
 * (latencies are used). On return *path_len is the number of edge ids
 * written (0 with *reachable == 0 when there is no path). */
tollsim_status tollsim_network_shortest_path(const tollsim_network* net, int32_t origin,
                                             int32_t destination, const double* edge_costs,
                                             int32_t* path_buf, int32_t buf_len,
                                             int32_t* path_len, double* cost,
                                             int32_t* reachable);

/* --- Toll updates ---------------------------------------------------- */

/* In-place projected step: tolls <- max(0, tolls - gamma (c - x)). */
tollsim_status tollsim_gradient_step(double* tolls, const double* capacities,
                                     const double* flows, int32_t n, double gamma);

/* --- Scenarios -------------------------------------------------------- */

tollsim_status tollsim_scenario_load(const char* config_path, tollsim_scenario** out);
void tollsim_scenario_free(tollsim_scenario* scenario);

/* Runs every configured (policy, seed) pair, writes the CSV bundle under
 * out_dir, and returns the printable metric summary. */
tollsim_status tollsim_run(tollsim_scenario* scenario, const char* out_dir, char** summary);

/* Repeats the run over the given horizons and fits log-log slopes of the
 * violation (and |regret| when well-defined). */
tollsim_status tollsim_sweep(tollsim_scenario* scenario, const int64_t* horizons,
                             int32_t horizon_count, const char* out_dir, char** summary);

/* Runs the invariant suite; TOLLSIM_ERR_CRITERIA when any check fails.
 * The report always comes back when non-NULL. */
tollsim_status tollsim_verify(int32_t fast, char** report);

#ifdef __cplusplus
}
#endif

#endif /* TOLLSIM_H */
