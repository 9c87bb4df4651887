/*
 * Copyright 2026 The spocpp authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the spocpp shared library: opaque handles, integer status
 * codes, thread-local error messages. Everything the CLI does goes through
 * this surface. */
#ifndef SPOCPP_SPOCPP_H_
#define SPOCPP_SPOCPP_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SPOCPP_OK = 0,
  SPOCPP_ERR_PARAMETER = 1,
  SPOCPP_ERR_CONVERGENCE = 2,
  SPOCPP_ERR_DEGENERATE_SPECTRUM = 3,
  SPOCPP_ERR_RANK_DEFICIENT = 4,
  SPOCPP_ERR_VERTEX_DEGENERATE = 5,
  SPOCPP_ERR_REGULARIZATION = 6,
  SPOCPP_ERR_RANK_ESTIMATION = 7,
  SPOCPP_ERR_SIZE = 8,
  SPOCPP_ERR_DOMAIN = 9,
  SPOCPP_ERR_IO = 10,
  SPOCPP_ERR_UNKNOWN = 99
} spocpp_status;

/* Message for the last failing call on this thread; empty string if none. */
const char* spocpp_last_error(void);

/* ---- instance generation ---------------------------------------------- */

/* Samples a membership matrix (pure_fraction per community, Dirichlet
 * mixing weights alpha, or all-ones when alpha is NULL) and an adjacency
 * under the planted community intensity matrix with diagonal b_diag and
 * off-diagonal b_offdiag scaled by rho. Writes the graph as an edge list
 * and the membership as CSV; either path may be NULL to skip it. */
spocpp_status spocpp_generate(int n, int K, double pure_fraction,
                              const double* alpha, double rho, double b_diag,
                              double b_offdiag, uint64_t seed,
                              const char* graph_path,
                              const char* membership_path);

/* ---- estimation ------------------------------------------------------- */

typedef struct {
  int k;             /* <= 0: estimate the community count from the graph */
  double threshold;  /* pure-set cutoff; < 0: default 2 ln n */
  int reg_mode;      /* 0 zero, 1 spectral, 2 fixed */
  double reg_value;  /* used when reg_mode == 2 */
  int clip_theta;    /* project membership rows onto the simplex */
  int signed_rank;   /* rank estimation on signed (1) or |.| (0) spectrum */
  int baseline;      /* run the plain vertex-hunting estimator instead */
} spocpp_options;

void spocpp_options_init(spocpp_options* opts);

typedef struct spocpp_estimate spocpp_estimate; /* opaque */

spocpp_status spocpp_estimate_file(const char* graph_path,
                                   const spocpp_options* opts,
                                   spocpp_estimate** out);

int spocpp_estimate_k(const spocpp_estimate* est);
int spocpp_estimate_n(const spocpp_estimate* est);
/* Row-major K x K community intensity estimate; owned by the handle. */
const double* spocpp_estimate_b(const spocpp_estimate* est);
/* Row-major n x K membership estimate; owned by the handle. */
const double* spocpp_estimate_theta(const spocpp_estimate* est);
/* Writes membership CSV / community-matrix CSV / run summary JSON; any
 * path may be NULL to skip that artifact. */
spocpp_status spocpp_estimate_save(const spocpp_estimate* est,
                                   const char* theta_csv, const char* b_csv,
                                   const char* summary_json);
void spocpp_estimate_free(spocpp_estimate* est);

/* ---- experiments ------------------------------------------------------ */

/* Runs an experiment described by a config document (key = value lines);
 * `overrides` (may be NULL) is appended after the document, so its
 * assignments win. On success *out_all_pass (may be NULL) is 1 unless a
 * lower-bound claim failed, and *out_summary (may be NULL) receives a
 * malloc'd copy of the summary JSON. */
spocpp_status spocpp_run_experiment(const char* config_text,
                                    const char* overrides, int* out_all_pass,
                                    char** out_summary);

/* Certifies the minimax hard-instance construction at (K, n, rho). Writes
 * the JSON report to json_path (NULL to skip) and sets *out_all_pass. */
spocpp_status spocpp_lowerbound_check(int K, int n, double rho, uint64_t seed,
                                      const char* json_path,
                                      int* out_all_pass, char** out_report);

void spocpp_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SPOCPP_SPOCPP_H_ */
