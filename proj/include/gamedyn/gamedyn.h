/* gamedyn: game dynamics simulation and contraction-based asymptotic analysis.
 *
 * C interface to the shared library. All objects are opaque handles created
 * and destroyed through these functions; every fallible call returns a
 * gd_status and writes its result through out-parameters. gd_last_error()
 * returns a thread-local description of the most recent failure.
 */

#ifndef GAMEDYN_GAMEDYN_H
#define GAMEDYN_GAMEDYN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GD_API __declspec(dllexport)
#elif defined(__GNUC__)
#define GD_API __attribute__((visibility("default")))
#else
#define GD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gd_status {
  GD_OK = 0,
  GD_ERR_INVALID_ARGUMENT = 1,
  GD_ERR_PARSE = 2,
  GD_ERR_DOMAIN = 3,
  GD_ERR_SHAPE = 4,
  GD_ERR_CONFIG = 5,
  GD_ERR_CONVERGENCE = 6,
  GD_ERR_RESOLUTION = 7,
  GD_ERR_IO = 8,
  GD_ERR_INTERNAL = 9
} gd_status;

GD_API const char* gd_version(void);
GD_API const char* gd_status_name(gd_status status);
/* Thread-local message describing the last failure in this thread. */
GD_API const char* gd_last_error(void);

/* --- opaque handles ---------------------------------------------------- */

typedef struct gd_game gd_game;             /* finite game (dense tables)   */
typedef struct gd_potential gd_potential;   /* potential candidate table    */
typedef struct gd_trajectory gd_trajectory; /* iterated path of play        */
typedef struct gd_report gd_report;         /* JSON report document         */

/* --- games --------------------------------------------------------------
 * File schema: {"players": N, "action_sets": [[..],..], "utilities": [..]}
 * with utilities[i] nested row-major, player 0 outermost. A potential file
 * replaces "utilities" with a single nested "potential" table.
 */

GD_API gd_status gd_game_load_file(const char* path, gd_game** out);
GD_API gd_status gd_game_parse(const char* text, gd_game** out);
GD_API void gd_game_free(gd_game* game);

GD_API int gd_game_players(const gd_game* game);
GD_API int gd_game_action_count(const gd_game* game, int player);
GD_API gd_status gd_game_action_value(const gd_game* game, int player, int index, double* out);
GD_API gd_status gd_game_utility(const gd_game* game, int player, const int* action_indices,
                                 double* out);

GD_API gd_status gd_potential_load_file(const char* path, const gd_game* game,
                                        gd_potential** out);
GD_API gd_status gd_potential_parse(const char* text, const gd_game* game, gd_potential** out);
GD_API void gd_potential_free(gd_potential* potential);

/* Maximum pairwise difference between two games with identical structure. */
GD_API gd_status gd_game_mpd(const gd_game* a, const gd_game* b, double* out);
/* Max discrepancy between utility increments and potential increments. */
GD_API gd_status gd_game_potential_residual(const gd_game* game, const gd_potential* potential,
                                            double* out);
/* Number of eps-NE profiles (brute force over the joint action space). */
GD_API gd_status gd_game_epsilon_ne_count(const gd_game* game, double eps, size_t* out);

/* --- simulation --------------------------------------------------------- */

typedef enum gd_rule_kind {
  GD_RULE_SEQUENTIAL_BEST = 0,
  GD_RULE_SEQUENTIAL_BETTER = 1,
  GD_RULE_SIMULTANEOUS_BEST = 2
} gd_rule_kind;

typedef enum gd_schedule {
  GD_SCHEDULE_ROUND_ROBIN = 0,
  GD_SCHEDULE_SEEDED_RANDOM = 1
} gd_schedule;

typedef enum gd_selector {
  GD_SELECTOR_FIRST_IMPROVING = 0,
  GD_SELECTOR_MAX_IMPROVING = 1
} gd_selector;

typedef struct gd_sim_options {
  gd_rule_kind kind;
  gd_schedule schedule;
  gd_selector selector; /* sequential better response only */
  uint64_t seed;
  int max_steps;
  int stop_on_cycle; /* nonzero: stop at the first profile recurrence */
} gd_sim_options;

/* x0 lists one action index per player. */
GD_API gd_status gd_simulate(const gd_game* game, const gd_sim_options* options, const int* x0,
                             int x0_len, gd_trajectory** out);
GD_API void gd_trajectory_free(gd_trajectory* trajectory);
GD_API int gd_trajectory_length(const gd_trajectory* trajectory);
GD_API int gd_trajectory_players(const gd_trajectory* trajectory);
/* Copies the state at step t into out (one coordinate per player). */
GD_API gd_status gd_trajectory_state(const gd_trajectory* trajectory, int t, double* out);
/* CSV: t,player_1,...,player_N,w_t,k_t,mover at 17 significant digits. */
GD_API gd_status gd_trajectory_write_csv(const gd_trajectory* trajectory, const char* path);

typedef enum gd_cycle_kind {
  GD_CYCLE_FIXED_POINT = 0,
  GD_CYCLE_CYCLE = 1,
  GD_CYCLE_UNDETERMINED = 2
} gd_cycle_kind;

typedef struct gd_cycle_info {
  gd_cycle_kind kind;
  int entry_index;
  int period;
} gd_cycle_info;

GD_API gd_status gd_detect_cycle(const gd_trajectory* trajectory, gd_cycle_info* out);

/* Near-potential convergence claim on a resolved sequential trajectory of
 * the (perturbed) game: fixed point => NE, cycle => inside X_{delta |A|}. */
GD_API gd_status gd_verify_theorem2(const gd_game* game, const gd_potential* potential,
                                    const gd_trajectory* trajectory, gd_report** out);

/* --- analysis ------------------------------------------------------------
 * domain_spec: "all", "eps:<value>", or "box:lo1,hi1,...,loN,hiN:<points>".
 */
GD_API gd_status gd_analyze_contraction(const gd_game* game, const char* domain_spec,
                                        double margin, gd_report** out);

GD_API gd_status gd_invariant_sets(const gd_game* game, const gd_potential* potential,
                                   const gd_trajectory* trajectory, int t0, double eps,
                                   gd_report** out);

/* --- cournot experiment -------------------------------------------------- */

typedef struct gd_cournot_config {
  double d, c1, c2, a_bar;
  int mu_auto;     /* nonzero: center the perturbation at the nominal NE */
  double mu[2];    /* used when mu_auto is zero */
  int n_starts;    /* 0: the default 3x3 grid minus its center */
  double starts[32];
  int sequential;  /* nonzero: sequential mode; else repeated */
  int max_steps;
  int grid_resolution; /* delta1 grid per axis */
} gd_cournot_config;

GD_API void gd_cournot_config_init(gd_cournot_config* config);
/* Runs nominal + perturbed dynamics from every start; when out_dir is not
 * NULL, writes trajectory CSVs, plot data and summary.json beneath it. */
GD_API gd_status gd_cournot_run(const gd_cournot_config* config, const char* out_dir,
                                gd_report** out);

/* --- verification suite --------------------------------------------------- */

typedef void (*gd_line_callback)(const char* line, void* user);

/* suite: "all" or one check name. Each finished check emits one line through
 * the callback (when non-NULL). */
GD_API gd_status gd_verify_run(const char* suite, gd_line_callback callback, void* user,
                               int* passed, int* failed, gd_report** out);

/* --- full run configurations ----------------------------------------------
 * config_json follows the documented RunConfig schema (strict parsing;
 * unknown fields are rejected). Writes output files per the config and
 * returns the report envelope.
 */
GD_API gd_status gd_run_json(const char* config_json, gd_report** out);

/* --- reports --------------------------------------------------------------- */

/* Borrowed pointer, valid until the report is freed. */
GD_API const char* gd_report_json(const gd_report* report);
GD_API gd_status gd_report_write(const gd_report* report, const char* path);
GD_API void gd_report_free(gd_report* report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GAMEDYN_GAMEDYN_H */
