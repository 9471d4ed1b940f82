// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "scaled.hpp"

namespace enclosure {

namespace {
constexpr double kFoldHigh = 1e64;
constexpr double kFoldLow = 1e-64;
}  // namespace

ScaledReal::ScaledReal(double mantissa, double exponent)
    : mantissa_(mantissa), exponent_(exponent) {
  normalize();
}

ScaledReal ScaledReal::from_log(double log_abs, int sign) {
  if (sign == 0 || log_abs == -std::numeric_limits<double>::infinity()) return {};
  return {sign > 0 ? 1.0 : -1.0, log_abs};
}

void ScaledReal::normalize() {
  if (mantissa_ == 0.0 || !std::isfinite(mantissa_)) {
    if (mantissa_ == 0.0) exponent_ = 0.0;
    return;
  }
  const double a = std::abs(mantissa_);
  if (a > kFoldHigh || a < kFoldLow) {
    exponent_ += std::log(a);
    mantissa_ = mantissa_ > 0 ? 1.0 : -1.0;
  }
}

double ScaledReal::log_abs() const {
  if (mantissa_ == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(std::abs(mantissa_)) + exponent_;
}

double ScaledReal::to_double() const {
  if (mantissa_ == 0.0) return 0.0;
  return mantissa_ * std::exp(exponent_);
}

ScaledReal& ScaledReal::operator*=(const ScaledReal& o) {
  mantissa_ *= o.mantissa_;
  exponent_ += o.exponent_;
  if (mantissa_ == 0.0) exponent_ = 0.0;
  normalize();
  return *this;
}

ScaledReal& ScaledReal::operator/=(const ScaledReal& o) {
  mantissa_ /= o.mantissa_;
  exponent_ -= o.exponent_;
  if (mantissa_ == 0.0) exponent_ = 0.0;
  normalize();
  return *this;
}

ScaledReal& ScaledReal::operator+=(const ScaledReal& o) {
  if (o.mantissa_ == 0.0) return *this;
  if (mantissa_ == 0.0) {
    *this = o;
    return *this;
  }
  if (exponent_ >= o.exponent_) {
    mantissa_ += o.mantissa_ * std::exp(o.exponent_ - exponent_);
  } else {
    mantissa_ = o.mantissa_ + mantissa_ * std::exp(exponent_ - o.exponent_);
    exponent_ = o.exponent_;
  }
  if (mantissa_ == 0.0) exponent_ = 0.0;
  normalize();
  return *this;
}

double ratio(const ScaledReal& a, const ScaledReal& b) {
  return a.mantissa() / b.mantissa() * std::exp(a.exponent() - b.exponent());
}

}  // namespace enclosure
