// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ENCLOSURE_ENCLOSURE_H
#define ENCLOSURE_ENCLOSURE_H

#include <stddef.h>

#if defined(ENC_BUILDING_LIBRARY)
#define ENC_API __attribute__((visibility("default")))
#else
#define ENC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum enc_status {
  ENC_OK = 0,
  ENC_ERR_INTERNAL = 1,
  ENC_ERR_CONFIG = 2,
  ENC_ERR_GEOMETRY = 3,
  ENC_ERR_SOLVER = 4,
  ENC_ERR_EXTRACTION = 5,
  ENC_ERR_INVALID_ARGUMENT = 6,
  ENC_ERR_QUADRATURE = 7,
  ENC_ERR_HYPOTHESIS = 8
} enc_status;

typedef struct enc_experiment enc_experiment;
typedef struct enc_result enc_result;

ENC_API const char* enc_version(void);
ENC_API const char* enc_status_name(enc_status status);
/* Process exit code for a status: 0 ok, 2 config, 3 geometry, 4 solver, 5 extraction, 1 other. */
ENC_API int enc_exit_code(enc_status status);

/* Details of the last failed call on this thread; never NULL. */
ENC_API const char* enc_last_error(void);
ENC_API const char* enc_last_error_stage(void);
ENC_API const char* enc_last_error_hint(void);

/* mode and seed may be NULL to keep the config's own values. */
ENC_API enc_status enc_experiment_load(const char* config_json, const char* mode, const unsigned long long* seed,
                                       enc_experiment** out);
ENC_API enc_status enc_experiment_load_file(const char* path, const char* mode, const unsigned long long* seed,
                                            enc_experiment** out);
ENC_API void enc_experiment_free(enc_experiment* exp);
ENC_API const char* enc_experiment_hash(const enc_experiment* exp);
ENC_API const char* enc_experiment_mode(const enc_experiment* exp);
ENC_API const char* enc_experiment_resolved_config(const enc_experiment* exp);

ENC_API enc_status enc_experiment_run(const enc_experiment* exp, int threads, enc_result** out);

ENC_API size_t enc_result_file_count(const enc_result* res);
ENC_API const char* enc_result_file_name(const enc_result* res, size_t index);
ENC_API const char* enc_result_file_content(const enc_result* res, size_t index);
ENC_API const char* enc_result_report(const enc_result* res);
ENC_API const char* enc_result_summary(const enc_result* res);
/* Nonzero when a validate-solver run breached a bound. */
ENC_API int enc_result_has_violations(const enc_result* res);
ENC_API void enc_result_free(enc_result* res);

#ifdef __cplusplus
}
#endif

#endif
