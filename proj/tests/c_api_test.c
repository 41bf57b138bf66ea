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

/* Exercises the shared library through its C header only, compiled as C. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "coadapt/coadapt.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s (%s)\n", __FILE__, __LINE__, \
              #cond, coadapt_last_error());                            \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static int count_lines(const char* s) {
  int n = 0;
  for (; *s; ++s) n += *s == '\n';
  return n;
}

static void test_games(void) {
  coadapt_game* g = NULL;
  coadapt_report* r = NULL;
  coadapt_equilibrium e;
  double c = 0.0;
  char* text = NULL;

  EXPECT(coadapt_version() != NULL);
  EXPECT(coadapt_game_preset("canonical", &g) == COADAPT_OK);
  EXPECT(coadapt_game_cost(g, COADAPT_MACHINE, 1.0, 1.0, &c) == COADAPT_OK);
  EXPECT(fabs(c - 0.5) < 1e-15);
  EXPECT(coadapt_solve(g, NULL, &r) == COADAPT_OK);
  EXPECT(coadapt_report_get(r, COADAPT_NASH, &e) == COADAPT_OK);
  EXPECT(e.valid && fabs(e.h + 0.2) < 1e-12 && fabs(e.m + 0.2) < 1e-12);
  EXPECT(e.stability == COADAPT_STABLE);
  EXPECT(isnan(e.L_H));
  EXPECT(coadapt_report_get(r, COADAPT_CCVE, &e) == COADAPT_OK);
  EXPECT(fabs(e.L_M - (sqrt(41.0) - 1.0) / 4.0) < 1e-12);
  EXPECT(coadapt_report_get(r, COADAPT_RSE, &e) == COADAPT_OK);
  EXPECT(fabs(e.L_M - 5.0 / 11.0) < 1e-12);
  EXPECT(coadapt_report_to_csv(r, &text) == COADAPT_OK);
  EXPECT(strncmp(text, "name,h,m,", 9) == 0);
  coadapt_string_free(text);
  coadapt_report_free(r);

  EXPECT(coadapt_game_to_text(g, &text) == COADAPT_OK);
  coadapt_game* back = NULL;
  EXPECT(coadapt_game_from_text(text, &back) == COADAPT_OK);
  coadapt_string_free(text);
  EXPECT(coadapt_game_cost(back, COADAPT_HUMAN, -0.2, -0.2, &c) == COADAPT_OK);
  EXPECT(fabs(c - 0.144) < 1e-14);
  coadapt_game_free(back);
  coadapt_game_free(g);

  EXPECT(coadapt_game_preset("chess", &g) == COADAPT_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(coadapt_last_error()) > 0);
  EXPECT(strcmp(coadapt_status_name(COADAPT_ERR_REPLAY), "replay") == 0);

  const double degenerate[12] = {1, 1, 1, 0, 0, 0, 1, 1, 1, 0, 0, 0};
  EXPECT(coadapt_game_quadratic(degenerate, &g) == COADAPT_OK);
  EXPECT(coadapt_solve(g, NULL, &r) == COADAPT_OK);
  EXPECT(coadapt_report_get(r, COADAPT_NASH, &e) == COADAPT_ERR_NO_EQUILIBRIUM);
  EXPECT(!e.valid);
  EXPECT(strstr(coadapt_last_error(), "singular") != NULL);
  coadapt_report_free(r);
  coadapt_game_free(g);

  coadapt_game_free(NULL);
  coadapt_report_free(NULL);
  coadapt_session_free(NULL);
  coadapt_string_free(NULL);
}

static void test_design(void) {
  coadapt_game* g = NULL;
  char* verification = NULL;
  char* specs = NULL;
  const char* spec =
      "{\"human_optimum\": [0.1, 0.7], \"machine_optimum\": [0, 0],"
      " \"nash\": [-0.2, -0.2], \"stackelberg\": [0.2, 0.2], \"D_M\": 2}";
  EXPECT(coadapt_design(spec, &g, &verification) == COADAPT_OK);
  EXPECT(strstr(verification, "PASS") != NULL);
  coadapt_string_free(verification);
  coadapt_game_free(g);
  EXPECT(coadapt_design("{\"nash\": [0, 0]}", &g, NULL) != COADAPT_OK);
  EXPECT(coadapt_random_design_specs(9, 3, &specs) == COADAPT_OK);
  EXPECT(specs[0] == '[');
  coadapt_string_free(specs);
}

static void test_simulation(void) {
  const char* cfg =
      "{\"experiment\": 1, \"human\": {\"model\": \"fd\", \"noise\": 0.01},"
      " \"samples_per_trial\": 60}";
  uint64_t seed = 42;
  char* a = NULL;
  char* b = NULL;
  char* csv = NULL;
  EXPECT(coadapt_simulate(cfg, NULL, 2, &seed, &a) == COADAPT_OK);
  EXPECT(coadapt_simulate(cfg, NULL, 2, &seed, &b) == COADAPT_OK);
  EXPECT(a && b && strcmp(a, b) == 0);
  EXPECT(count_lines(a) == 2 * 16);
  EXPECT(coadapt_summary_csv(a, &csv) == COADAPT_OK);
  EXPECT(count_lines(csv) == 1 + 2 * 14);
  coadapt_string_free(csv);
  EXPECT(coadapt_analyze(a, NULL, &csv) == COADAPT_OK);
  EXPECT(strncmp(csv, "experiment,stage,", 17) == 0);
  coadapt_string_free(csv);
  coadapt_string_free(a);
  coadapt_string_free(b);
  EXPECT(coadapt_simulate("{\"experiment\": 0}", NULL, 1, NULL, &a) ==
         COADAPT_ERR_INVALID_ARGUMENT);
  EXPECT(strstr(coadapt_last_error(), "config.experiment") != NULL);
}

static void test_session(void) {
  coadapt_session* s = NULL;
  char* ev = NULL;
  char* log = NULL;
  char* rec = NULL;
  int i;
  const char* cfg =
      "{\"experiment\": 1, \"human\": {\"model\": \"live\"}, \"samples_per_trial\": 5,"
      " \"attention_check\": false, \"rest_every\": 0, \"strategy\": {\"alphas\": [0.5]},"
      " \"trials_per_condition\": 1}";
  EXPECT(coadapt_session_create("c1", cfg, &s) == COADAPT_OK);
  EXPECT(coadapt_session_message(s, "{\"type\": \"start\"}", &ev) == COADAPT_OK);
  EXPECT(strstr(ev, "trialStart") != NULL);
  coadapt_string_free(ev);
  for (i = 0; i < 6; ++i) {
    EXPECT(coadapt_session_message(s, "{\"type\": \"input\", \"x\": 0.2}", &ev) == COADAPT_OK);
    coadapt_string_free(ev);
    EXPECT(coadapt_session_advance(s, 1, &ev) == COADAPT_OK);
    EXPECT(strstr(ev, "frame") != NULL);
    coadapt_string_free(ev);
  }
  EXPECT(coadapt_session_status(s, &ev) == COADAPT_OK);
  EXPECT(strstr(ev, "\"survey\"") != NULL);
  coadapt_string_free(ev);
  EXPECT(coadapt_session_advance(s, -1, &ev) == COADAPT_ERR_INVALID_ARGUMENT);
  EXPECT(coadapt_session_log(s, &log) == COADAPT_OK);
  EXPECT(coadapt_replay(log, &rec) == COADAPT_OK);
  EXPECT(count_lines(rec) == 3);
  coadapt_string_free(rec);
  coadapt_string_free(log);
  coadapt_session_free(s);
  EXPECT(coadapt_replay("garbage\n{}\n", &rec) == COADAPT_ERR_REPLAY);
}

int main(void) {
  test_games();
  test_design();
  test_simulation();
  test_session();
  if (failures) {
    fprintf(stderr, "%d failures\n", failures);
    return 1;
  }
  printf("c api: all checks passed\n");
  return 0;
}
