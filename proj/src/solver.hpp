// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "bessel.hpp"
#include "fields.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"

namespace enclosure {

/// Impedance sphere with constant admittance, probed from p with a
/// polarization a perpendicular to the line from the center to p.
struct ModalConfig {
  Sphere sphere;
  double lambda = 1.0;      // +inf selects the perfect conductor
  int n_max = 0;            // 0 selects the adaptive default
  double tail_tol = 1e-12;  // target relative size of the last modes
  int n_cap = 2000;
  int expansion_checks = 10;
};

/// Scattered/incident ratio per order for both parities, scaled so that
/// beta = beta_scaled * e^{2 rho} with rho = kappa R.
///   TE (potential x.curl E): beta = -(lam i - lam0 Di) / (lam k - lam0 Dk)
///   TM (potential x.E):      beta = -(lam0 i - lam Di) / (lam0 k - lam Dk)
/// where Dz = [rho z]'/rho.
struct ReflectionCoefficients {
  double rho = 0.0;
  std::vector<long double> te;
  std::vector<long double> tm;
};

ReflectionCoefficients reflection_coefficients(const ModifiedSphericalBessel& at_surface, double lambda,
                                               const MediumParams& medium);
ReflectionCoefficients reflection_coefficients(double radius, double lambda, const MediumParams& medium, double tau,
                                               int n_max);

struct ExpansionCheck {
  double max_error = 0.0;  // max relative |series - closed form| of E and H
  int points = 0;
};

struct BoundaryResidual {
  double max_resolvable = 0.0;  // node-wise, over nodes with |W| >= 1e-6 peak
  double max_global = 0.0;      // node residual / peak |W| over all nodes
  int resolvable_nodes = 0;
};

/// Vector modal series for the incident and scattered fields.
class ModalSolution {
 public:
  ModalSolution(const ProbeConfig& cfg, const ModalConfig& modal, double tau);

  int n_max() const { return n_max_; }
  double tau() const { return tau_; }
  double kappa() const { return kappa_; }
  /// Largest relative pole contribution among the last five orders.
  double tail() const { return tail_; }
  const ReflectionCoefficients& reflection() const { return refl_; }
  const IncidentField& incident_closed_form() const { return incident_; }
  const ModalConfig& modal() const { return modal_; }
  const Diagnostics& diagnostics() const { return diagnostics_; }
  const ExpansionCheck& expansion_check() const { return check_; }

  /// Regular series of the incident field (valid for |x - c| < L).
  FieldSample incident_at(const Vec3& x) const;
  /// Scattered (reflected) field, valid for |x - c| >= R.
  FieldSample scattered_at(const Vec3& x) const;

  /// Reflected fields at every node; nodes must lie on the sphere.
  std::vector<FieldSample> surface_reflected_fields(const SurfaceQuadrature& quad) const;

  /// Leontovich residual of incident + reflected fields at the nodes.
  BoundaryResidual boundary_residual(const SurfaceQuadrature& quad, const std::vector<FieldSample>& reflected) const;

  /// Exact indicator through the source ball pairing:
  ///   I = -(4 pi / (eps mu)) K f~ a . R_e(p).
  ScaledReal source_pairing() const;

 private:
  struct Radial {
    std::vector<long double> U, Ud, W, Wd;
  };
  void assemble(int n_max);
  FieldSample evaluate(const Vec3& x, const Radial& radial, double exponent) const;
  Radial incident_radial(double r) const;
  Radial scattered_radial(const ModifiedSphericalBessel& b) const;
  ExpansionCheck check_expansion() const;

  ProbeConfig cfg_;
  ModalConfig modal_;
  double tau_;
  double kappa_;
  double L_;
  double Z_;
  double rho_;
  Vec3 ex_, ey_, ez_;
  IncidentField incident_;
  int n_max_ = 0;
  double tail_ = 0.0;
  std::vector<long double> coef_u_;  // kappa (2n+1)/(n(n+1)) k_n(Z), scaled by e^{Z}
  std::vector<long double> coef_w_;  // -(2n+1)/(n(n+1)) Dk_n(Z), scaled by e^{Z}
  ModifiedSphericalBessel surface_;
  ReflectionCoefficients refl_;
  ExpansionCheck check_;
  Diagnostics diagnostics_;
};

/// Default starting order ceil(kR + 8 (kR)^{1/3} + 20).
int default_n_max(double kappa_radius);

}  // namespace enclosure
