// SPDX-License-Identifier: Apache-2.0
//
// irs-sim: frequency-selective IRS reflection modelling and joint beamforming
// Copyright (C) 2026 The irs-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

/* C interface of the irs-sim library. Every call returns an irs_status;
 * on failure irs_last_error() describes the problem for the calling thread.
 * Strings are copied into caller buffers: pass buf = NULL and cap = 0 to query
 * the required size (terminating NUL included) through `needed`. */

#ifndef IRS_SIM_H
#define IRS_SIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IRS_API __declspec(dllexport)
#else
#define IRS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum irs_status {
  IRS_OK = 0,
  IRS_E_INVALID_ARGUMENT = 1,
  IRS_E_DOMAIN = 2,
  IRS_E_INFEASIBLE = 3,
  IRS_E_NUMERICAL = 4,
  IRS_E_IO = 5,
  IRS_E_PARSE = 6,
  IRS_E_NOT_CONVERGED = 7,
  IRS_E_BUFFER_TOO_SMALL = 8,
  IRS_E_INTERNAL = 100
} irs_status;

typedef struct irs_config irs_config;
typedef struct irs_scenario irs_scenario;

typedef struct irs_run_options {
  const char* output; /* NULL keeps the experiment's configured path */
  uint64_t seed;
  int override_seed;  /* nonzero: use `seed` as the master seed */
  int trials;         /* 0 keeps the configured trial count */
  int full_scale;
  int timing;         /* fill the wall-clock column */
  int threads;        /* 0 keeps the configured value */
} irs_run_options;

IRS_API const char* irs_version(void);
IRS_API const char* irs_last_error(void);
IRS_API const char* irs_status_name(irs_status status);

IRS_API irs_status irs_config_new(irs_config** out);
IRS_API irs_status irs_config_parse(const char* json_text, irs_config** out);
IRS_API irs_status irs_config_load(const char* path, irs_config** out);
IRS_API void irs_config_free(irs_config* config);

/* Sets a top-level configuration key from a JSON literal, e.g. ("M", "32"). */
IRS_API irs_status irs_config_set(irs_config* config, const char* key, const char* json_value);

/* Numeric scenario fields: S, K, Nt, M, sigma2, gamma, P, L, D, C0, d0, seed. */
IRS_API irs_status irs_config_get_number(const irs_config* config, const char* key, double* out);

/* Newline-separated experiment names. */
IRS_API irs_status irs_experiment_names(const irs_config* config, char* buf, size_t cap,
                                        size_t* needed);

IRS_API void irs_run_options_init(irs_run_options* options);
IRS_API irs_status irs_run_experiment(const irs_config* config, const char* experiment,
                                      const irs_run_options* options);

IRS_API irs_status irs_partition_table(const irs_config* config, char* buf, size_t cap,
                                       size_t* needed);

/* Runs the invariant suite; `all_passed` receives 1 or 0. */
IRS_API irs_status irs_validate(char* buf, size_t cap, size_t* needed, int* all_passed);

IRS_API irs_status irs_reflection_coefficient(double L1, double L2, double R, double Z0,
                                              double capacitance, double frequency,
                                              double* re, double* im);

/* Channel draw of one Monte-Carlo trial under the configuration's seed. */
IRS_API irs_status irs_scenario_new(const irs_config* config, int trial, irs_scenario** out);
IRS_API void irs_scenario_free(irs_scenario* scenario);

/* problem: "power_min" (watts) or "sum_rate" (bit/s/Hz); scheme: "proposed",
 * "no_selection", "random_selection" or "no_irs". */
IRS_API irs_status irs_scenario_evaluate(const irs_scenario* scenario, const char* problem,
                                         const char* scheme, double* metric);

#ifdef __cplusplus
}
#endif

#endif /* IRS_SIM_H */
