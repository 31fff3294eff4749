/*
 * Copyright 2026 The dcsurrogate Authors.
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

/* C interface to the dcsurrogate toolkit: pipeline commands over an
 * experiment manifest, and inference with a trained checkpoint.
 *
 * Every fallible call returns a dcs_status. On failure the message is
 * available from dcs_last_error() on the calling thread until the next
 * failing call. Strings returned through char** belong to the caller and
 * are released with dcs_string_free(). */

#ifndef DCSURROGATE_DCSURROGATE_H
#define DCSURROGATE_DCSURROGATE_H

#include <stddef.h>
#include <stdint.h>

#if defined(DCS_BUILDING_CAPI)
#define DCS_API __attribute__((visibility("default")))
#else
#define DCS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values match the CLI exit codes. */
typedef enum dcs_status {
    DCS_OK = 0,
    DCS_ERR_ARGUMENT = 1,
    DCS_ERR_PARSE = 2,
    DCS_ERR_VALIDATION = 3,
    DCS_ERR_IO = 4,
    DCS_ERR_SIMULATION = 5,
    DCS_ERR_NUMERIC = 6,
    DCS_ERR_MISSING_ARTIFACT = 7,
    DCS_ERR_INTERNAL = 99
} dcs_status;

typedef enum dcs_command {
    DCS_CMD_SIMULATE = 0,
    DCS_CMD_PREPROCESS = 1,
    DCS_CMD_TUNE = 2,
    DCS_CMD_TRAIN = 3,
    DCS_CMD_EVALUATE = 4,
    DCS_CMD_BENCH = 5
} dcs_command;

typedef struct dcs_manifest dcs_manifest;
typedef struct dcs_surrogate dcs_surrogate;

DCS_API const char* dcs_version(void);
DCS_API const char* dcs_status_name(dcs_status status);
/* Never NULL; empty when the thread has not failed yet. */
DCS_API const char* dcs_last_error(void);
DCS_API void dcs_string_free(char* s);

/* Manifests start from the built-in defaults. */
DCS_API dcs_status dcs_manifest_new(dcs_manifest** out);
DCS_API void dcs_manifest_free(dcs_manifest* manifest);
/* Overlays the fields present in a JSON object; later overlays win. */
DCS_API dcs_status dcs_manifest_apply_json(dcs_manifest* manifest, const char* json);
DCS_API dcs_status dcs_manifest_apply_file(dcs_manifest* manifest, const char* path);
DCS_API dcs_status dcs_manifest_validate(const dcs_manifest* manifest);
DCS_API dcs_status dcs_manifest_to_json(const dcs_manifest* manifest, char** out);
DCS_API dcs_status dcs_manifest_hash(const dcs_manifest* manifest, uint64_t* out);

/* Runs one pipeline stage; *summary (optional) receives a one-line report. */
DCS_API dcs_status dcs_run(dcs_command command, const dcs_manifest* manifest, char** summary);
DCS_API dcs_status dcs_command_from_name(const char* name, dcs_command* out);

/* Built-in platform of "homogeneous" or "heterogeneous" as JSON. */
DCS_API dcs_status dcs_platform_json(const char* scenario, char** out);

DCS_API dcs_status dcs_surrogate_load(const char* path, dcs_surrogate** out);
DCS_API void dcs_surrogate_free(dcs_surrogate* surrogate);
DCS_API dcs_status dcs_surrogate_dims(const dcs_surrogate* surrogate, size_t* n_features, size_t* n_targets);
/* features: row-major [n_rows x n_features] in original units.
 * simulation_ids: one per row, or NULL for a single simulation; rows of a
 * simulation are taken in order of appearance.
 * out: row-major [n_rows x n_targets], same row order as the input. */
DCS_API dcs_status dcs_surrogate_predict(dcs_surrogate* surrogate, size_t n_rows, const int64_t* simulation_ids,
                                         const double* features, double* out);

#ifdef __cplusplus
}
#endif

#endif /* DCSURROGATE_DCSURROGATE_H */
