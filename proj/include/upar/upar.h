/*
 * Copyright 2026 The UP-AR Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the recourse engine.
 *
 * Every function returns a upar_status. On failure a message is available
 * from upar_last_error() on the calling thread until the next call. Strings
 * returned through char** parameters are owned by the caller and must be
 * released with upar_string_free(). All payloads are JSON; see
 * docs/formats.md.
 */

#ifndef UPAR_UPAR_H
#define UPAR_UPAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define UPAR_API __declspec(dllexport)
#else
#define UPAR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum upar_status {
  UPAR_OK = 0,
  UPAR_ERR_INVALID_ARGUMENT = 1, /* malformed input or config */
  UPAR_ERR_INVALID_PROFILE = 2,  /* preference violations, see output */
  UPAR_ERR_PRECONDITION = 3,     /* e.g. instance already classified +1 */
  UPAR_ERR_IO = 4,
  UPAR_ERR_NUMERIC = 5,
  UPAR_ERR_INTERNAL = 6
} upar_status;

/* Loaded schema, model, dataset and percentile table. Immutable once open,
 * so one session may serve concurrent calls. */
typedef struct upar_session upar_session;

UPAR_API const char* upar_version(void);
UPAR_API const char* upar_status_name(upar_status status);
UPAR_API const char* upar_last_error(void);
UPAR_API void upar_string_free(char* s);

/* `config_json` is a session config; relative paths resolve against
 * `base_dir` (may be NULL for the working directory). */
UPAR_API upar_status upar_session_open(const char* config_json, const char* base_dir,
                                       upar_session** out);
UPAR_API upar_status upar_session_open_file(const char* config_path, upar_session** out);
UPAR_API void upar_session_close(upar_session* session);

/* Routes one HTTP-style request. *http_status and *response are always set
 * when the call returns UPAR_OK, including for 4xx answers. */
UPAR_API upar_status upar_session_request(const upar_session* session, const char* method,
                                          const char* path, const char* body, int* http_status,
                                          char** response);

/* Recourse for {instance, preferences, seed, method, trace}. On
 * UPAR_ERR_INVALID_PROFILE *out holds the violations document. */
UPAR_API upar_status upar_recourse_json(const upar_session* session, const char* request_json,
                                        char** out);
/* Same request, rendered as a text table (with the step trace if `trace`). */
UPAR_API upar_status upar_recourse_text(const upar_session* session, const char* request_json,
                                        int trace, char** out);
/* Violations of a preference profile: {"valid", "violations"}. */
UPAR_API upar_status upar_validate_json(const upar_session* session, const char* profile_json,
                                        char** out);

/* Blocks serving HTTP on host:port. */
UPAR_API upar_status upar_serve(const upar_session* session, const char* host, int port,
                                const char* static_dir);

/* Runs an experiment config. `output_dir` (may be NULL) overrides the
 * config's output directory; `seed_override` < 0 keeps the config seeds.
 * *summary receives a JSON summary if non-NULL. */
UPAR_API upar_status upar_run_experiment(const char* config_path, const char* output_dir,
                                         int64_t seed_override, char** summary);

/* Trains the model described by the session config's "model": {"train"}
 * entry and writes it to `model_path`. *report receives accuracy and loss. */
UPAR_API upar_status upar_train_model(const char* config_path, const char* model_path,
                                      char** report);

/* Writes a synthetic labelled CSV for the schema at `schema_path`. */
UPAR_API upar_status upar_synthesize(const char* schema_path, uint64_t seed, size_t n,
                                     double separation, const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif /* UPAR_UPAR_H */
