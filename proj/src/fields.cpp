// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "fields.hpp"

#include <cmath>

namespace enclosure {

void ProbeConfig::validate() const {
  if (!p.allFinite()) throw Error(ErrorKind::invalid_argument, "probe: non-finite center");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorKind::invalid_argument, "probe: eta must be positive");
  if (!a.allFinite() || std::abs(a.norm() - 1.0) > 1e-12) {
    throw Error(ErrorKind::invalid_argument, "probe: polarization a must be a unit vector");
  }
  profile.validate();
}

void ProbeConfig::check_disjoint(const Obstacle& obstacle) const {
  const auto near = nearest_points(obstacle, p);
  if (!(near.d > eta)) {
    throw Error(ErrorKind::geometry, "probe: source ball meets the obstacle (d(p) = " + std::to_string(near.d) +
                                         ", eta = " + std::to_string(eta) + ")");
  }
}

IncidentField::IncidentField(const ProbeConfig& cfg, double tau, std::optional<ScaledReal> amplitude)
    : cfg_(cfg), tau_(tau), kappa_(cfg.medium.kappa(tau)) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorKind::invalid_argument, "incident field: tau must be positive");
  amplitude_ = amplitude ? *amplitude
                         : source_factor(cfg.medium, cfg.eta, tau) * ScaledReal(pulse_laplace(cfg.profile, tau));
}

FieldSample IncidentField::sample(const Vec3& x) const {
  const Vec3 rel = x - cfg_.p;
  const double r = rel.norm();
  if (!(r > cfg_.eta)) {
    throw Error(ErrorKind::geometry, "incident field evaluated inside the source ball");
  }
  const Vec3 w = rel / r;
  const Vec3& a = cfg_.a;
  const double g = 1.0 / (kappa_ * r);
  const double A = 1.0 + g + g * g;
  const double B = 1.0 + 3.0 * g + 3.0 * g * g;
  const double c = amplitude_.mantissa() / r;

  FieldSample s;
  s.exponent = amplitude_.exponent() - kappa_ * r;
  s.E = c * (A * a - B * w.dot(a) * w);
  s.curlE = -kappa_ * c * (1.0 + g) * w.cross(a);
  s.H = -s.curlE / (tau_ * cfg_.medium.mu());
  return s;
}

ScaledVec incident_E(const ProbeConfig& cfg, const Vec3& x, double tau) {
  return IncidentField(cfg, tau).sample(x).scaled_E();
}

ScaledVec incident_curlE(const ProbeConfig& cfg, const Vec3& x, double tau) {
  return IncidentField(cfg, tau).sample(x).scaled_curlE();
}

ScaledVec incident_H(const ProbeConfig& cfg, const Vec3& x, double tau) {
  return IncidentField(cfg, tau).sample(x).scaled_H();
}

Vec3 D_operator(const Vec3& x, const Vec3& nu, double lambda, const Vec3& p, const Vec3& a,
                const MediumParams& medium) {
  const Vec3 w = (x - p).normalized();
  const double l0 = medium.lambda0();
  return a.cross(nu) / l0 - a.dot(w) * w.cross(nu) / l0 - w.cross(a) / lambda;
}

Vec3 V_em0(const FieldSample& s, const Vec3& nu, double lambda) {
  return nu.cross(s.E.cross(nu)) - nu.cross(s.H) / lambda;
}

ScaledVec V_em0(const ProbeConfig& cfg, const Vec3& q, const Vec3& nu, double lambda, double tau) {
  const auto s = IncidentField(cfg, tau).sample(q);
  return {V_em0(s, nu, lambda), s.exponent};
}

}  // namespace enclosure
