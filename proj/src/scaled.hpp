// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace enclosure {

using Vec3 = Eigen::Vector3d;

/// A real number stored as mantissa * e^exponent.
///
/// Indicator values at tau ~ 10^3 are of order e^{-2000}, far below the range
/// of a double. Every field amplitude and indicator value travels in this form
/// and only ratios or logarithms are ever converted back to plain doubles.
class ScaledReal {
 public:
  ScaledReal() = default;
  ScaledReal(double mantissa, double exponent = 0.0);  // NOLINT(implicit)

  static ScaledReal from_log(double log_abs, int sign);

  double mantissa() const { return mantissa_; }
  double exponent() const { return exponent_; }
  int sign() const { return (mantissa_ > 0) - (mantissa_ < 0); }
  bool is_zero() const { return mantissa_ == 0.0; }
  bool is_finite() const { return std::isfinite(mantissa_) && std::isfinite(exponent_); }

  /// log|value|; -inf for zero.
  double log_abs() const;
  /// Plain double; under/overflows silently outside the double range.
  double to_double() const;

  ScaledReal operator-() const { return {-mantissa_, exponent_}; }
  ScaledReal& operator*=(const ScaledReal& o);
  ScaledReal& operator/=(const ScaledReal& o);
  ScaledReal& operator+=(const ScaledReal& o);
  ScaledReal& operator-=(const ScaledReal& o) { return *this += -o; }

  friend ScaledReal operator*(ScaledReal a, const ScaledReal& b) { return a *= b; }
  friend ScaledReal operator/(ScaledReal a, const ScaledReal& b) { return a /= b; }
  friend ScaledReal operator+(ScaledReal a, const ScaledReal& b) { return a += b; }
  friend ScaledReal operator-(ScaledReal a, const ScaledReal& b) { return a -= b; }

 private:
  void normalize();

  double mantissa_ = 0.0;
  double exponent_ = 0.0;
};

/// Ratio a/b as a plain double (exponents cancel before conversion).
double ratio(const ScaledReal& a, const ScaledReal& b);

/// Vector with a shared e-exponent: value = mantissa * e^exponent.
struct ScaledVec {
  Vec3 mantissa = Vec3::Zero();
  double exponent = 0.0;

  /// Same vector re-expressed against another exponent.
  Vec3 at_exponent(double target) const {
    return mantissa * std::exp(exponent - target);
  }
};

}  // namespace enclosure
