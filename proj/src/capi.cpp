// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "enclosure/enclosure.h"

#include <exception>
#include <new>
#include <optional>
#include <string>

#include "error.hpp"
#include "experiment.hpp"

struct enc_experiment {
  enclosure::Experiment exp;
  std::string resolved;
};

struct enc_result {
  enclosure::RunResult result;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_stage;
thread_local std::string g_hint;

enc_status status_of(enclosure::ErrorKind k) {
  using enclosure::ErrorKind;
  switch (k) {
    case ErrorKind::invalid_argument: return ENC_ERR_INVALID_ARGUMENT;
    case ErrorKind::config: return ENC_ERR_CONFIG;
    case ErrorKind::geometry: return ENC_ERR_GEOMETRY;
    case ErrorKind::solver: return ENC_ERR_SOLVER;
    case ErrorKind::quadrature: return ENC_ERR_QUADRATURE;
    case ErrorKind::extraction: return ENC_ERR_EXTRACTION;
    case ErrorKind::hypothesis: return ENC_ERR_HYPOTHESIS;
  }
  return ENC_ERR_INTERNAL;
}

void clear_error() {
  g_error.clear();
  g_stage.clear();
  g_hint.clear();
}

template <class F>
enc_status guarded(F&& f) {
  clear_error();
  try {
    f();
    return ENC_OK;
  } catch (const enclosure::Error& e) {
    g_error = e.what();
    g_stage = e.stage();
    g_hint = enclosure::remediation_hint(e);
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
  } catch (const std::exception& e) {
    g_error = e.what();
  } catch (...) {
    g_error = "unknown error";
  }
  return ENC_ERR_INTERNAL;
}

enc_status null_argument(const char* what) {
  clear_error();
  g_error = std::string(what) + " must not be NULL";
  return ENC_ERR_INVALID_ARGUMENT;
}

std::optional<enclosure::Mode> parse_mode(const char* mode) {
  if (!mode) return std::nullopt;
  return enclosure::mode_from_string(mode);
}

std::optional<unsigned long long> parse_seed(const unsigned long long* seed) {
  if (!seed) return std::nullopt;
  return *seed;
}

}  // namespace

extern "C" {

const char* enc_version(void) { return "0.1.0"; }

const char* enc_status_name(enc_status status) {
  switch (status) {
    case ENC_OK: return "ok";
    case ENC_ERR_INTERNAL: return "internal";
    case ENC_ERR_CONFIG: return "config";
    case ENC_ERR_GEOMETRY: return "geometry";
    case ENC_ERR_SOLVER: return "solver";
    case ENC_ERR_EXTRACTION: return "extraction";
    case ENC_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case ENC_ERR_QUADRATURE: return "quadrature";
    case ENC_ERR_HYPOTHESIS: return "hypothesis";
  }
  return "unknown";
}

int enc_exit_code(enc_status status) {
  switch (status) {
    case ENC_OK: return 0;
    case ENC_ERR_CONFIG:
    case ENC_ERR_INVALID_ARGUMENT: return 2;
    case ENC_ERR_GEOMETRY:
    case ENC_ERR_HYPOTHESIS: return 3;
    case ENC_ERR_SOLVER:
    case ENC_ERR_QUADRATURE: return 4;
    case ENC_ERR_EXTRACTION: return 5;
    default: return 1;
  }
}

const char* enc_last_error(void) { return g_error.c_str(); }
const char* enc_last_error_stage(void) { return g_stage.c_str(); }
const char* enc_last_error_hint(void) { return g_hint.c_str(); }

enc_status enc_experiment_load(const char* config_json, const char* mode, const unsigned long long* seed,
                               enc_experiment** out) {
  if (!config_json) return null_argument("config_json");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto exp = enclosure::load_experiment(config_json, parse_mode(mode), parse_seed(seed));
    std::string resolved = exp.resolved.dump(2);
    *out = new enc_experiment{std::move(exp), std::move(resolved)};
  });
}

enc_status enc_experiment_load_file(const char* path, const char* mode, const unsigned long long* seed,
                                    enc_experiment** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto exp = enclosure::load_experiment_file(path, parse_mode(mode), parse_seed(seed));
    std::string resolved = exp.resolved.dump(2);
    *out = new enc_experiment{std::move(exp), std::move(resolved)};
  });
}

void enc_experiment_free(enc_experiment* exp) { delete exp; }

const char* enc_experiment_hash(const enc_experiment* exp) { return exp ? exp->exp.hash.c_str() : ""; }

const char* enc_experiment_mode(const enc_experiment* exp) { return exp ? enclosure::to_string(exp->exp.mode) : ""; }

const char* enc_experiment_resolved_config(const enc_experiment* exp) { return exp ? exp->resolved.c_str() : ""; }

enc_status enc_experiment_run(const enc_experiment* exp, int threads, enc_result** out) {
  if (!exp) return null_argument("exp");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    enclosure::RunOptions opts;
    opts.threads = threads;
    auto r = enclosure::run_experiment(exp->exp, exp->exp.mode, opts);
    *out = new enc_result{std::move(r)};
  });
}

size_t enc_result_file_count(const enc_result* res) { return res ? res->result.files.size() : 0; }

const char* enc_result_file_name(const enc_result* res, size_t index) {
  if (!res || index >= res->result.files.size()) return nullptr;
  return res->result.files[index].name.c_str();
}

const char* enc_result_file_content(const enc_result* res, size_t index) {
  if (!res || index >= res->result.files.size()) return nullptr;
  return res->result.files[index].content.c_str();
}

const char* enc_result_report(const enc_result* res) { return res ? res->result.report.c_str() : ""; }

const char* enc_result_summary(const enc_result* res) { return res ? res->result.summary.c_str() : ""; }

int enc_result_has_violations(const enc_result* res) { return res && res->result.violations ? 1 : 0; }

void enc_result_free(enc_result* res) { delete res; }

}  // extern "C"
