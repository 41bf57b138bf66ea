/*
 * Copyright 2026 The Coadapt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the coadapt library: scalar two-player games, their
 * equilibria, game design, simulated experiments, analysis, live sessions
 * and the session server.
 *
 * Conventions:
 *   - Every fallible call returns a coadapt_status. On failure the message is
 *     available from coadapt_last_error() on the same thread until the next
 *     call.
 *   - Handles are opaque and freed with their *_free function. Passing NULL to
 *     a *_free function is a no-op.
 *   - Strings returned through char** are heap-allocated and released with
 *     coadapt_string_free().
 *   - Structured inputs and outputs are JSON text unless noted.
 */

#ifndef COADAPT_COADAPT_H_
#define COADAPT_COADAPT_H_

#include <stdint.h>

#if defined(_WIN32)
#define COADAPT_API __declspec(dllexport)
#else
#define COADAPT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum coadapt_status {
  COADAPT_OK = 0,
  COADAPT_ERR_INVALID_ARGUMENT = 1,
  COADAPT_ERR_DOMAIN = 2,
  COADAPT_ERR_DEGENERATE = 3,
  COADAPT_ERR_NO_OPTIMUM = 4,
  COADAPT_ERR_NO_EQUILIBRIUM = 5,
  COADAPT_ERR_INFEASIBLE_POLICY = 6,
  COADAPT_ERR_SINGULAR = 7,
  COADAPT_ERR_DESIGN_INFEASIBLE = 8,
  COADAPT_ERR_CONJECTURE_UNDEFINED = 9,
  COADAPT_ERR_PAIRING = 10,
  COADAPT_ERR_IO = 11,
  COADAPT_ERR_PARSE = 12,
  COADAPT_ERR_REPLAY = 13,
  COADAPT_ERR_STATE = 14,
  COADAPT_ERR_INTERNAL = 15
} coadapt_status;

typedef enum coadapt_player { COADAPT_HUMAN = 0, COADAPT_MACHINE = 1 } coadapt_player;

typedef enum coadapt_equilibrium_kind {
  COADAPT_HUMAN_OPTIMUM = 0,
  COADAPT_MACHINE_OPTIMUM = 1,
  COADAPT_NASH = 2,
  COADAPT_STACKELBERG = 3,
  COADAPT_CCVE = 4,
  COADAPT_RSE = 5
} coadapt_equilibrium_kind;

typedef enum coadapt_stability {
  COADAPT_STABLE = 0,
  COADAPT_UNSTABLE = 1,
  COADAPT_UNDETERMINED = 2
} coadapt_stability;

typedef struct coadapt_equilibrium {
  int valid;
  double h;
  double m;
  double L_H; /* NaN when not applicable */
  double L_M;
  coadapt_stability stability;
  double diagnostic;
} coadapt_equilibrium;

typedef struct coadapt_game coadapt_game;
typedef struct coadapt_report coadapt_report;
typedef struct coadapt_session coadapt_session;
typedef struct coadapt_server coadapt_server;

COADAPT_API const char* coadapt_version(void);
COADAPT_API const char* coadapt_last_error(void);
COADAPT_API const char* coadapt_status_name(coadapt_status status);
COADAPT_API void coadapt_string_free(char* s);

/* Games. Presets: "canonical", "cobb-douglas", "cobb-douglas-policy". */
COADAPT_API coadapt_status coadapt_game_preset(const char* name, coadapt_game** out);
/* Key-value game text (see README). */
COADAPT_API coadapt_status coadapt_game_from_text(const char* text, coadapt_game** out);
COADAPT_API coadapt_status coadapt_game_from_json(const char* json, coadapt_game** out);
/* Loads .json files as JSON and anything else as game text. */
COADAPT_API coadapt_status coadapt_game_load(const char* path, coadapt_game** out);
/* Quadratic game from {A_H, B_H, D_H, b_H, d_H, a_H, A_M, B_M, D_M, b_M, d_M, a_M}. */
COADAPT_API coadapt_status coadapt_game_quadratic(const double coeffs[12], coadapt_game** out);
COADAPT_API coadapt_status coadapt_game_to_json(const coadapt_game* game, char** out);
COADAPT_API coadapt_status coadapt_game_to_text(const coadapt_game* game, char** out);
COADAPT_API coadapt_status coadapt_game_cost(const coadapt_game* game, coadapt_player who,
                                             double h, double m, double* out);
COADAPT_API void coadapt_game_free(coadapt_game* game);

/* Equilibria. rse_target may be NULL (machine optimum) or point to {h, m}. */
COADAPT_API coadapt_status coadapt_solve(const coadapt_game* game, const double* rse_target,
                                         coadapt_report** out);
/* Fills *out even when the game lacks that equilibrium; then valid is 0 and
 * the call returns COADAPT_ERR_NO_EQUILIBRIUM with the reason. */
COADAPT_API coadapt_status coadapt_report_get(const coadapt_report* report,
                                              coadapt_equilibrium_kind kind,
                                              coadapt_equilibrium* out);
COADAPT_API coadapt_status coadapt_report_to_text(const coadapt_report* report, char** out);
COADAPT_API coadapt_status coadapt_report_to_csv(const coadapt_report* report, char** out);
COADAPT_API void coadapt_report_free(coadapt_report* report);

/* Design. spec_json holds human_optimum, machine_optimum, nash, stackelberg
 * as [h, m] pairs and optionally D_M. On success *game_out is the designed
 * game and *verification_out (if non-NULL) the round-trip report. */
COADAPT_API coadapt_status coadapt_design(const char* spec_json, coadapt_game** game_out,
                                          char** verification_out);
/* Draws n feasible design specs from seed; writes a JSON array. */
COADAPT_API coadapt_status coadapt_random_design_specs(uint64_t seed, int n, char** out);

/* Simulated experiments. config_json is an experiment config; relative game
 * files resolve against base_dir (may be NULL). seed, when non-NULL,
 * replaces the config seed. Output is records NDJSON. */
COADAPT_API coadapt_status coadapt_simulate(const char* config_json, const char* base_dir,
                                            int subjects, const uint64_t* seed, char** out);
/* Writes experiment<id>_records.ndjson and experiment<id>_summary.csv into
 * out_dir; *paths_out lists the files, one per line. */
COADAPT_API coadapt_status coadapt_export_records(const char* records_ndjson,
                                                  const char* out_dir, char** paths_out);
COADAPT_API coadapt_status coadapt_summary_csv(const char* records_ndjson, char** out);
/* Statistics CSV. game may be NULL to use the game in the records. */
COADAPT_API coadapt_status coadapt_analyze(const char* records_ndjson,
                                           const coadapt_game* game, char** out);

/* Live sessions in process. Events are returned as a JSON array. */
COADAPT_API coadapt_status coadapt_session_create(const char* id, const char* config_json,
                                                  coadapt_session** out);
COADAPT_API coadapt_status coadapt_session_message(coadapt_session* session,
                                                   const char* message_json, char** events_out);
COADAPT_API coadapt_status coadapt_session_advance(coadapt_session* session, int ticks,
                                                   char** events_out);
COADAPT_API coadapt_status coadapt_session_status(const coadapt_session* session, char** out);
COADAPT_API coadapt_status coadapt_session_log(const coadapt_session* session, char** out);
COADAPT_API void coadapt_session_free(coadapt_session* session);
/* Replays a session log; output is records NDJSON for the replayed run. */
COADAPT_API coadapt_status coadapt_replay(const char* log_text, char** out);

/* Server. options_json keys: address, port, data_dir, manual_clock, seed. */
COADAPT_API coadapt_status coadapt_server_start(const char* options_json,
                                                coadapt_server** out, unsigned short* port);
/* Stops the server and frees the handle. */
COADAPT_API void coadapt_server_stop(coadapt_server* server);
/* Serves on the calling thread until SIGINT or SIGTERM. */
COADAPT_API coadapt_status coadapt_server_run(const char* options_json);

#ifdef __cplusplus
}
#endif

#endif /* COADAPT_COADAPT_H_ */
