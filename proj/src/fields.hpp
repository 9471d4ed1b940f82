// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "geometry.hpp"
#include "kernels.hpp"
#include "scaled.hpp"

namespace enclosure {

/// Source ball B = B_eta(p) driven by J = f(t) chi_B a.
struct ProbeConfig {
  Vec3 p = Vec3::Zero();
  double eta = 0.1;
  Vec3 a = Vec3::UnitX();
  PulseProfile profile;
  MediumParams medium;

  /// |a| = 1 (to 1e-12) and eta > 0.
  void validate() const;
  /// Closed ball disjoint from the closed obstacle: d(p) > eta.
  void check_disjoint(const Obstacle& obstacle) const;
};

/// Field values (E, H, curl E) = mantissas * e^exponent.
struct FieldSample {
  Vec3 E = Vec3::Zero();
  Vec3 H = Vec3::Zero();
  Vec3 curlE = Vec3::Zero();
  double exponent = 0.0;

  ScaledVec scaled_E() const { return {E, exponent}; }
  ScaledVec scaled_H() const { return {H, exponent}; }
  ScaledVec scaled_curlE() const { return {curlE, exponent}; }
};

/// Closed-form free-space probe fields at one tau:
///   E = C0 v (A a - B (w.a) w),  curl E = -k C0 v (1 + 1/(k r)) w x a,
///   H = -curl E / (tau mu),
/// with C0 = K(tau) f~(tau), k = tau sqrt(mu eps), r = |x - p|, w = (x - p)/r.
class IncidentField {
 public:
  /// amplitude overrides C0 (the solver works per unit amplitude).
  IncidentField(const ProbeConfig& cfg, double tau, std::optional<ScaledReal> amplitude = std::nullopt);

  /// Throws a geometry error for x inside the closed source ball.
  FieldSample sample(const Vec3& x) const;

  const ProbeConfig& config() const { return cfg_; }
  double tau() const { return tau_; }
  double kappa() const { return kappa_; }
  const ScaledReal& amplitude() const { return amplitude_; }

 private:
  ProbeConfig cfg_;
  double tau_;
  double kappa_;
  ScaledReal amplitude_;
};

ScaledVec incident_E(const ProbeConfig& cfg, const Vec3& x, double tau);
ScaledVec incident_curlE(const ProbeConfig& cfg, const Vec3& x, double tau);
ScaledVec incident_H(const ProbeConfig& cfg, const Vec3& x, double tau);

/// (1/lambda0) a x nu - (1/lambda0)(a.w) w x nu - (1/lambda) w x a.
Vec3 D_operator(const Vec3& x, const Vec3& nu, double lambda, const Vec3& p, const Vec3& a,
                const MediumParams& medium);

/// nu x (E x nu) - (1/lambda) nu x H for the incident fields at a surface point.
ScaledVec V_em0(const ProbeConfig& cfg, const Vec3& q, const Vec3& nu, double lambda, double tau);
Vec3 V_em0(const FieldSample& s, const Vec3& nu, double lambda);

}  // namespace enclosure
