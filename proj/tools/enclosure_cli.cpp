// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "enclosure/enclosure.h"

namespace fs = std::filesystem;

namespace {

int fail(enc_status st) {
  std::cerr << "error (" << enc_status_name(st) << ")";
  if (*enc_last_error_stage()) std::cerr << " [" << enc_last_error_stage() << "]";
  std::cerr << ": " << enc_last_error() << "\n";
  if (*enc_last_error_hint()) std::cerr << "hint: " << enc_last_error_hint() << "\n";
  return enc_exit_code(st);
}

bool write_file(const fs::path& path, const char* content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return static_cast<bool>(out);
}

int run(const std::string& mode, const std::string& config, const std::string& out_dir, int threads,
        std::optional<unsigned long long> seed) {
  enc_experiment* exp = nullptr;
  enc_status st = enc_experiment_load_file(config.c_str(), mode.c_str(), seed ? &*seed : nullptr, &exp);
  if (st != ENC_OK) return fail(st);

  enc_result* res = nullptr;
  st = enc_experiment_run(exp, threads, &res);
  if (st != ENC_OK) {
    enc_experiment_free(exp);
    return fail(st);
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << out_dir << ": " << ec.message() << "\n";
    enc_result_free(res);
    enc_experiment_free(exp);
    return 1;
  }
  bool ok = true;
  for (size_t i = 0; i < enc_result_file_count(res); ++i) {
    ok = write_file(fs::path(out_dir) / enc_result_file_name(res, i), enc_result_file_content(res, i)) && ok;
  }
  ok = write_file(fs::path(out_dir) / "report.json", enc_result_report(res)) && ok;
  ok = write_file(fs::path(out_dir) / "summary.txt", enc_result_summary(res)) && ok;
  std::cout << "config_hash " << enc_experiment_hash(exp) << "\n" << enc_result_summary(res);

  const bool violations = enc_result_has_violations(res) != 0;
  enc_result_free(res);
  enc_experiment_free(exp);
  if (!ok) {
    std::cerr << "error: failed writing outputs to " << out_dir << "\n";
    return 1;
  }
  return violations ? enc_exit_code(ENC_ERR_SOLVER) : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Enclosure-method experiments for impedance obstacles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", enc_version());

  std::string config, out_dir = ".";
  int threads = 1;
  std::optional<unsigned long long> seed;

  const char* modes[][2] = {
      {"predict", "closed-form limits with per-point breakdown"},
      {"indicator", "indicator samples over the tau grid"},
      {"extract", "distance and leading coefficient from indicator samples"},
      {"reconstruct", "curvatures and admittance at the nearest point"},
      {"validate-solver", "modal solver checks on a sphere fixture"},
  };
  for (const auto& m : modes) {
    auto* sub = app.add_subcommand(m[0], m[1]);
    sub->add_option("--config", config, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_option("--seed", seed, "noise seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : enc_exit_code(ENC_ERR_INVALID_ARGUMENT);
  }
  return run(app.get_subcommands().front()->get_name(), config, out_dir, threads, seed);
}
