// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "kernels.hpp"

#include <cmath>

#include "error.hpp"

namespace enclosure {

MediumParams::MediumParams(double epsilon, double mu) : epsilon_(epsilon), mu_(mu) {
  if (!(epsilon > 0.0) || !(mu > 0.0) || !std::isfinite(epsilon) || !std::isfinite(mu)) {
    throw Error(ErrorKind::invalid_argument, "medium: epsilon and mu must be positive and finite");
  }
  lambda0_ = std::sqrt(epsilon / mu);
  wavespeed_inv_ = std::sqrt(mu * epsilon);
}

void PulseProfile::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(ErrorKind::invalid_argument, "pulse: observation horizon T must be positive");
  }
}

TauGrid TauGrid::geometric(double lo, double hi, double ratio) {
  if (!(lo > 0.0) || !(hi > lo) || !(ratio > 1.0)) {
    throw Error(ErrorKind::invalid_argument, "tau grid: need 0 < lo < hi and ratio > 1");
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(std::log(hi / lo) / std::log(ratio) - 1e-9)));
  const double r = std::pow(hi / lo, 1.0 / steps);
  TauGrid grid;
  grid.spacing = TauSpacing::geometric;
  for (int i = 0; i < steps; ++i) grid.values.push_back(lo * std::pow(r, i));
  grid.values.push_back(hi);
  return grid;
}

TauGrid TauGrid::linear(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw Error(ErrorKind::invalid_argument, "tau grid: need 0 < lo < hi and count >= 2");
  }
  TauGrid grid;
  grid.spacing = TauSpacing::linear;
  for (int i = 0; i < count; ++i) grid.values.push_back(lo + (hi - lo) * i / (count - 1));
  return grid;
}

void TauGrid::validate() const {
  if (values.empty()) throw Error(ErrorKind::invalid_argument, "tau grid: empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw Error(ErrorKind::invalid_argument, "tau grid: entries must be positive");
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw Error(ErrorKind::invalid_argument, "tau grid: entries must be strictly increasing");
    }
  }
}

double phi(double xi) {
  if (xi < 1.0) {
    // sum_{k>=1} 2k xi^{2k+1} / (2k+1)!
    const double xi2 = xi * xi;
    double term = xi * xi2 / 6.0;  // xi^3 / 3!
    double sum = 0.0;
    for (int k = 1; k < 30; ++k) {
      sum += 2.0 * k * term;
      term *= xi2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
      if (term < 1e-18 * sum) break;
    }
    return sum;
  }
  return 0.5 * (std::exp(xi) * (xi - 1.0) + std::exp(-xi) * (xi + 1.0));
}

double log_phi(double xi) {
  if (xi < 30.0) return std::log(phi(xi));
  return xi + std::log(0.5 * (xi - 1.0) + 0.5 * std::exp(-2.0 * xi) * (xi + 1.0));
}

namespace {

// Regularized lower incomplete gamma P(n+1, x) = 1 - e^{-x} sum_{j<=n} x^j/j!.
double lower_gamma_regularized(int n, double x) {
  if (x < n + 2.0) {
    // e^{-x} sum_{j>n} x^j / j!
    double term = 1.0;
    for (int j = 1; j <= n + 1; ++j) term *= x / j;
    double sum = 0.0;
    for (int j = n + 1; j < n + 200; ++j) {
      sum += term;
      term *= x / (j + 1);
      if (term < 1e-18 * sum) break;
    }
    return std::exp(-x) * sum;
  }
  double partial = 0.0;
  double term = 1.0;
  for (int j = 0; j <= n; ++j) {
    partial += term;
    term *= x / (j + 1);
  }
  return 1.0 - std::exp(-x) * partial;
}

}  // namespace

double pulse_laplace(const PulseProfile& profile, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::invalid_argument, "pulse_laplace: tau must be positive");
  const int n = profile.kind == PulseKind::linear_ramp ? 1 : 2;
  const double factorial = n == 1 ? 1.0 : 2.0;
  return factorial / std::pow(tau, n + 1) * lower_gamma_regularized(n, tau * profile.T);
}

ScaledReal source_factor(const MediumParams& medium, double eta, double tau) {
  if (!(tau > 0.0) || !(eta > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "source_factor: tau and eta must be positive");
  }
  const double kappa = medium.kappa(tau);
  const double log_k = std::log(medium.mu()) + std::log(tau) + log_phi(kappa * eta) - 3.0 * std::log(kappa);
  return ScaledReal::from_log(log_k, 1);
}

ScaledReal source_factor_asymptotic(const MediumParams& medium, double eta, double tau) {
  if (!(tau > 0.0) || !(eta > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "source_factor: tau and eta must be positive");
  }
  const double log_k = std::log(eta) + medium.kappa(tau) * eta - std::log(2.0 * medium.epsilon()) - std::log(tau);
  return ScaledReal::from_log(log_k, 1);
}

double source_factor_ratio(const MediumParams& medium, double eta, double tau) {
  const double xi = medium.kappa(tau) * eta;
  if (xi >= 1.0) return (1.0 - 1.0 / xi) + std::exp(-2.0 * xi) * (1.0 + 1.0 / xi);
  return 2.0 * phi(xi) / (xi * std::exp(xi));
}

ScaledReal point_kernel(const Vec3& x, const Vec3& p, const MediumParams& medium, double tau) {
  const double r = (x - p).norm();
  if (r < 1e-14) throw Error(ErrorKind::geometry, "point_kernel: evaluation point coincides with source centre");
  return {1.0 / r, -medium.kappa(tau) * r};
}

}  // namespace enclosure
