// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "inverse.hpp"

namespace enclosure {

enum class Mode { predict, indicator, extract, reconstruct, validate_solver };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// Fully resolved experiment: every default filled in, obstacle built.
struct Experiment {
  nlohmann::json resolved;  // canonical config (sorted keys)
  std::string hash;         // 16 hex digits, FNV-1a over resolved.dump()
  Mode mode = Mode::indicator;
  std::string fixture_id;
  MediumParams medium;
  Obstacle obstacle = Obstacle::sphere(Sphere{}, Admittance::constant(1.0));
  ProbeConfig probe;
  TauGrid grid;
  DataSource source = DataSource::exact;
  QuadratureOptions quadrature;
  ReconstructionConfig reconstruction;
};

/// Parses and validates a JSON config; throws config/geometry errors. A
/// given mode or seed replaces the config's own before defaults are resolved.
Experiment load_experiment(const std::string& json_text, std::optional<Mode> mode = std::nullopt,
                           std::optional<unsigned long long> seed = std::nullopt);
Experiment load_experiment_file(const std::string& path, std::optional<Mode> mode = std::nullopt,
                                std::optional<unsigned long long> seed = std::nullopt);

std::string fnv1a_hex(const std::string& data);

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunOptions {
  int threads = 1;
};

struct RunResult {
  std::vector<OutputFile> files;
  std::string report;   // JSON document
  std::string summary;  // human-readable text
  bool violations = false;  // validate-solver bound breaches
};

RunResult run_experiment(Experiment exp, Mode mode, const RunOptions& opts);

/// Suggested next step for a failed run, empty when none applies.
std::string remediation_hint(const Error& e);

/// 17 significant digits.
std::string format_double(double v);

}  // namespace enclosure
