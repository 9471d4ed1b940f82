// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "scaled.hpp"

namespace enclosure {

/// Homogeneous background medium.
class MediumParams {
 public:
  MediumParams() : MediumParams(1.0, 1.0) {}
  MediumParams(double epsilon, double mu);

  double epsilon() const { return epsilon_; }
  double mu() const { return mu_; }
  /// Free-space admittance sqrt(eps/mu).
  double lambda0() const { return lambda0_; }
  /// Inverse wave speed sqrt(mu*eps).
  double wavespeed_inv() const { return wavespeed_inv_; }
  /// Decay rate tau*sqrt(mu*eps) of the Laplace-domain fields.
  double kappa(double tau) const { return tau * wavespeed_inv_; }

 private:
  double epsilon_;
  double mu_;
  double lambda0_;
  double wavespeed_inv_;
};

enum class PulseKind { linear_ramp, quadratic_ramp };

/// Source time profile f(t) = t or t^2 on [0, T].
struct PulseProfile {
  PulseKind kind = PulseKind::linear_ramp;
  double T = 10.0;

  /// Exponent in liminf tau^gamma |f~(tau)| > 0.
  int gamma() const { return kind == PulseKind::linear_ramp ? 2 : 3; }
  double value(double t) const { return kind == PulseKind::linear_ramp ? t : t * t; }
  void validate() const;
};

enum class TauSpacing { geometric, linear };

struct TauGrid {
  std::vector<double> values;
  TauSpacing spacing = TauSpacing::geometric;

  /// Geometric grid from lo to hi (both included); the ratio is shrunk
  /// slightly so the last node lands on hi.
  static TauGrid geometric(double lo, double hi, double ratio = 1.25);
  static TauGrid linear(double lo, double hi, int count);
  /// Default grid for log-slope fits: ratio 1.25 from 10 to 10^4.
  static TauGrid default_grid() { return geometric(10.0, 1e4, 1.25); }

  void validate() const;
};

/// xi cosh(xi) - sinh(xi), evaluated without cancellation at both ends.
double phi(double xi);
/// log(phi(xi)) for xi > 0, finite for arbitrarily large xi.
double log_phi(double xi);

/// Laplace transform f~(tau) = int_0^T e^{-tau t} f(t) dt in closed form.
double pulse_laplace(const PulseProfile& profile, double tau);

/// K(tau) = mu tau phi(tau sqrt(mu eps) eta) / (tau sqrt(mu eps))^3.
ScaledReal source_factor(const MediumParams& medium, double eta, double tau);
/// Leading-order model eta e^{tau eta sqrt(mu eps)} / (2 eps tau).
ScaledReal source_factor_asymptotic(const MediumParams& medium, double eta, double tau);
/// K / K_asym as a plain double (tends to 1 as tau grows).
double source_factor_ratio(const MediumParams& medium, double eta, double tau);

/// v(x, tau) = e^{-tau sqrt(mu eps)|x-p|} / |x-p|. Throws when x == p.
ScaledReal point_kernel(const Vec3& x, const Vec3& p, const MediumParams& medium, double tau);

}  // namespace enclosure
