// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace enclosure {

// Error classes map one-to-one onto the C API status codes and CLI exit codes.
enum class ErrorKind {
  invalid_argument,
  config,
  geometry,
  solver,
  quadrature,
  extraction,
  hypothesis,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::string stage = {})
      : std::runtime_error(what), kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  ErrorKind kind_;
  std::string stage_;
};

// Non-fatal findings surfaced next to results (warnings, hypothesis checks).
struct Diagnostic {
  std::string code;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

inline bool has_diagnostic(const Diagnostics& diags, const std::string& code) {
  for (const auto& d : diags) {
    if (d.code == code) return true;
  }
  return false;
}

}  // namespace enclosure
