// SPDX-License-Identifier: Apache-2.0
//
// simcf: SIM-aided cell-free massive MIMO downlink simulator and trainer
// Copyright (C) 2026 The simcf authors
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

#ifndef SIMCF_H
#define SIMCF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SIMCF_API __declspec(dllexport)
#else
#define SIMCF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum
{
    SIMCF_OK = 0,
    SIMCF_INVALID_ARGUMENT = 1, // bad config, bad shape, unknown key
    SIMCF_IO = 2,
    SIMCF_NUMERIC = 3, // non-finite values, training divergence
    SIMCF_STATE = 4,   // call order violated (step before reset, step after done)
    SIMCF_INTERNAL = 5
} simcf_status;

typedef struct simcf_config simcf_config;
typedef struct simcf_env simcf_env;

SIMCF_API const char *simcf_version(void);

// Message of the last failed call on this thread; empty string if none.
SIMCF_API const char *simcf_last_error(void);

/* Configuration */

SIMCF_API simcf_status simcf_config_from_preset(const char *name, simcf_config **out);
// Fields absent from the file keep their desk preset values.
SIMCF_API simcf_status simcf_config_load(const char *path, simcf_config **out);
// Dotted key, e.g. "marl.episodes"; value is JSON text or a bare string.
SIMCF_API simcf_status simcf_config_set(simcf_config *cfg, const char *key, const char *value);
// Writes the JSON form into buf (NUL terminated). *needed receives the size including the terminator.
SIMCF_API simcf_status simcf_config_to_json(const simcf_config *cfg, char *buf, size_t buf_size, size_t *needed);
SIMCF_API simcf_status simcf_config_output_dir(const simcf_config *cfg, char *buf, size_t buf_size, size_t *needed);
SIMCF_API void simcf_config_free(simcf_config *cfg);

/* Runs; every result is written as files into out_dir */

SIMCF_API simcf_status simcf_train(const simcf_config *cfg, const char *out_dir, int verbose);
SIMCF_API simcf_status simcf_baseline(const simcf_config *cfg, const char *out_dir, double *mean_sum_se);
// axis is "layers" or "atoms"; methods is a comma-separated list of codebook_wf, nvr_mappo, mappo.
SIMCF_API simcf_status simcf_sweep(const simcf_config *cfg, const char *axis, const size_t *values, size_t n_values,
                                   const char *methods, size_t seeds, const char *out_dir);
SIMCF_API simcf_status simcf_eval(const simcf_config *cfg, const char *checkpoint, size_t episodes,
                                  const char *out_dir, double *mean_sum_se);

/* Environment */

SIMCF_API simcf_status simcf_env_create(const simcf_config *cfg, simcf_env **out);
SIMCF_API simcf_status simcf_env_dims(const simcf_env *env, size_t *agents, size_t *obs_dim, size_t *action_dim);
// obs receives agents * obs_dim values, agent-major.
SIMCF_API simcf_status simcf_env_reset(simcf_env *env, uint64_t seed, double *obs);
SIMCF_API simcf_status simcf_env_observation(const simcf_env *env, double *obs);
// actions holds agents * action_dim raw actor outputs, agent-major.
SIMCF_API simcf_status simcf_env_step(simcf_env *env, const double *actions, double *obs, double *reward, int *done);
SIMCF_API void simcf_env_free(simcf_env *env);

#ifdef __cplusplus
}
#endif

#endif
