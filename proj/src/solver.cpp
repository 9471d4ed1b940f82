// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace enclosure {

int default_n_max(double kappa_radius) {
  return static_cast<int>(std::ceil(kappa_radius + 8.0 * std::cbrt(kappa_radius) + 20.0));
}

ReflectionCoefficients reflection_coefficients(const ModifiedSphericalBessel& b, double lambda,
                                               const MediumParams& medium) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::invalid_argument, "reflection coefficients: lambda must be positive");
  ReflectionCoefficients out;
  out.rho = b.rho;
  out.te.resize(b.n_max + 1);
  out.tm.resize(b.n_max + 1);
  const long double l0 = medium.lambda0();
  const long double l = lambda;
  for (int n = 0; n <= b.n_max; ++n) {
    const long double i = b.i_scaled[n], di = b.ri_scaled(n);
    const long double k = b.k_scaled[n], dk = b.rk_scaled(n);
    long double num_te, den_te, num_tm, den_tm, scale_te, scale_tm;
    if (std::isinf(lambda)) {
      num_te = i;
      den_te = scale_te = k;
      num_tm = di;
      den_tm = scale_tm = dk;
    } else {
      num_te = l * i - l0 * di;
      den_te = l * k - l0 * dk;
      num_tm = l0 * i - l * di;
      den_tm = l0 * k - l * dk;
      scale_te = std::fabs(l * k) + std::fabs(l0 * dk);
      scale_tm = std::fabs(l0 * k) + std::fabs(l * dk);
    }
    const long double tiny = 1e-300L;
    if (std::fabs(den_te) < tiny * std::fabs(scale_te) || std::fabs(den_tm) < tiny * std::fabs(scale_tm)) {
      throw Error(ErrorKind::solver, "reflection coefficients: near-singular denominator at order " + std::to_string(n));
    }
    out.te[n] = -num_te / den_te;
    out.tm[n] = -num_tm / den_tm;
  }
  return out;
}

ReflectionCoefficients reflection_coefficients(double radius, double lambda, const MediumParams& medium, double tau,
                                               int n_max) {
  return reflection_coefficients(modified_spherical_bessel(n_max, medium.kappa(tau) * radius), lambda, medium);
}

ModalSolution::ModalSolution(const ProbeConfig& cfg, const ModalConfig& modal, double tau)
    : cfg_(cfg), modal_(modal), tau_(tau), kappa_(cfg.medium.kappa(tau)), incident_(cfg, tau) {
  cfg_.validate();
  const double R = modal_.sphere.radius;
  if (!(R > 0.0)) throw Error(ErrorKind::invalid_argument, "solver: sphere radius must be positive");
  if (!(modal_.lambda > 0.0)) throw Error(ErrorKind::invalid_argument, "solver: lambda must be positive");
  const Vec3 rel = cfg_.p - modal_.sphere.center;
  L_ = rel.norm();
  if (!(L_ > R + cfg_.eta)) {
    throw Error(ErrorKind::geometry, "solver: source ball must lie outside the sphere (L > R + eta)");
  }
  ez_ = rel / L_;
  if (std::abs(cfg_.a.dot(ez_)) > 1e-10) {
    throw Error(ErrorKind::invalid_argument, "solver: polarization must be perpendicular to the probe axis");
  }
  ex_ = (cfg_.a - cfg_.a.dot(ez_) * ez_).normalized();
  ey_ = ez_.cross(ex_);
  Z_ = kappa_ * L_;
  rho_ = kappa_ * R;

  int n = modal_.n_max > 0 ? modal_.n_max : default_n_max(rho_);
  n = std::min(n, modal_.n_cap);
  assemble(n);
  if (modal_.n_max <= 0) {
    while (tail_ > modal_.tail_tol && n_max_ < modal_.n_cap) {
      assemble(std::min(modal_.n_cap, n_max_ + std::max(10, n_max_ / 4)));
    }
  }
  if (tail_ > 1e-10) {
    diagnostics_.push_back({"truncation_insufficient", "modal tail " + std::to_string(tail_) + " exceeds 1e-10 at n_max " +
                                                           std::to_string(n_max_)});
  }
  check_ = check_expansion();
  if (check_.max_error > 1e-8) {
    diagnostics_.push_back({"expansion_mismatch",
                            "incident series differs from the closed form by " + std::to_string(check_.max_error)});
  }
}

void ModalSolution::assemble(int n_max) {
  n_max_ = n_max;
  const auto kz = modified_spherical_bessel(n_max, Z_);
  surface_ = modified_spherical_bessel(n_max, rho_);
  refl_ = reflection_coefficients(surface_, modal_.lambda, cfg_.medium);
  coef_u_.assign(n_max + 1, 0.0L);
  coef_w_.assign(n_max + 1, 0.0L);
  const long double kap = kappa_;
  for (int k = 1; k <= n_max; ++k) {
    const long double c = (2.0L * k + 1.0L) / (static_cast<long double>(k) * (k + 1.0L));
    coef_u_[k] = kap * c * kz.k_scaled[k];
    coef_w_[k] = -c * kz.rk_scaled(k);
  }

  std::vector<long double> mag(n_max + 1, 0.0L);
  long double total = 0.0L;
  for (int k = 1; k <= n_max; ++k) {
    const long double di = surface_.ri_scaled(k), dk = surface_.rk_scaled(k);
    const long double inc = std::fabs(coef_u_[k] * surface_.i_scaled[k]) + std::fabs(coef_w_[k] * kap * di) +
                            std::fabs(coef_u_[k] * di) + std::fabs(coef_w_[k] * kap * surface_.i_scaled[k]);
    const long double sc = std::fabs(coef_u_[k] * refl_.te[k] * surface_.k_scaled[k]) +
                           std::fabs(coef_w_[k] * refl_.tm[k] * kap * dk) + std::fabs(coef_u_[k] * refl_.te[k] * dk) +
                           std::fabs(coef_w_[k] * refl_.tm[k] * kap * surface_.k_scaled[k]);
    mag[k] = 0.5L * k * (k + 1.0L) * (inc + sc);
    total += mag[k];
  }
  long double last = 0.0L;
  for (int k = std::max(1, n_max - 4); k <= n_max; ++k) last = std::max(last, mag[k]);
  tail_ = total > 0.0L ? static_cast<double>(last / total) : 0.0;
}

ModalSolution::Radial ModalSolution::incident_radial(double r) const {
  const auto b = (r == modal_.sphere.radius) ? surface_ : modified_spherical_bessel(n_max_, kappa_ * r);
  Radial out;
  out.U.resize(n_max_ + 1);
  out.Ud.resize(n_max_ + 1);
  out.W.resize(n_max_ + 1);
  out.Wd.resize(n_max_ + 1);
  const long double kap = kappa_;
  for (int k = 1; k <= n_max_; ++k) {
    out.U[k] = coef_u_[k] * b.i_scaled[k];
    out.Ud[k] = coef_u_[k] * kap * b.ri_scaled(k);
    out.W[k] = coef_w_[k] * b.i_scaled[k];
    out.Wd[k] = coef_w_[k] * kap * b.ri_scaled(k);
  }
  return out;
}

ModalSolution::Radial ModalSolution::scattered_radial(const ModifiedSphericalBessel& b) const {
  Radial out;
  out.U.resize(n_max_ + 1);
  out.Ud.resize(n_max_ + 1);
  out.W.resize(n_max_ + 1);
  out.Wd.resize(n_max_ + 1);
  const long double kap = kappa_;
  for (int k = 1; k <= n_max_; ++k) {
    const long double u = coef_u_[k] * refl_.te[k];
    const long double w = coef_w_[k] * refl_.tm[k];
    out.U[k] = u * b.k_scaled[k];
    out.Ud[k] = u * kap * b.rk_scaled(k);
    out.W[k] = w * b.k_scaled[k];
    out.Wd[k] = w * kap * b.rk_scaled(k);
  }
  return out;
}

FieldSample ModalSolution::evaluate(const Vec3& x, const Radial& radial, double exponent) const {
  const Vec3 rel = x - modal_.sphere.center;
  const double r = rel.norm();
  if (!(r > 0.0)) throw Error(ErrorKind::invalid_argument, "solver: field requested at the sphere center");
  const long double ct = std::clamp(rel.dot(ez_) / r, -1.0, 1.0);
  const long double st = std::sqrt(std::max(0.0L, 1.0L - ct * ct));
  const double phi = std::atan2(rel.dot(ey_), rel.dot(ex_));
  const double cp = std::cos(phi), sp = std::sin(phi);
  const long double kap2 = static_cast<long double>(kappa_) * kappa_;

  long double er = 0, eth = 0, eph = 0, hr = 0, hth = 0, hph = 0;
  long double p0 = 1.0L, p1 = ct;  // P_{n-1}, P_n
  long double q0 = 0.0L, q1 = 1.0L;  // pi_{n-1}, pi_n
  for (int n = 1; n <= n_max_; ++n) {
    if (n >= 2) {
      const long double p2 = ((2.0L * n - 1.0L) * ct * p1 - (n - 1.0L) * p0) / n;
      const long double q2 = ((2.0L * n - 1.0L) * ct * q1 - static_cast<long double>(n) * q0) / (n - 1.0L);
      p0 = p1;
      p1 = p2;
      q0 = q1;
      q1 = q2;
    }
    const long double nn = n * (n + 1.0L);
    const long double pi_n = q1;
    const long double tau_n = nn * p1 - ct * q1;
    const long double p1n = st * pi_n;
    const long double U = radial.U[n], Ud = radial.Ud[n], W = radial.W[n], Wd = radial.Wd[n];
    er += nn * W * p1n;
    eth += U * pi_n + Wd * tau_n;
    eph += U * tau_n + Wd * pi_n;
    hr += nn * U * p1n;
    hth += Ud * tau_n + kap2 * W * pi_n;
    hph += Ud * pi_n + kap2 * W * tau_n;
  }
  const double inv_r = 1.0 / r;
  const double hs = -1.0 / (tau_ * cfg_.medium.mu());
  const double Er = cp * static_cast<double>(er) * inv_r;
  const double Eth = cp * static_cast<double>(eth);
  const double Eph = -sp * static_cast<double>(eph);
  const double Hr = hs * sp * static_cast<double>(hr) * inv_r;
  const double Hth = hs * sp * static_cast<double>(hth);
  const double Hph = hs * cp * static_cast<double>(hph);

  const double s = static_cast<double>(st), c = static_cast<double>(ct);
  const Vec3 rhat = s * cp * ex_ + s * sp * ey_ + c * ez_;
  const Vec3 that = c * cp * ex_ + c * sp * ey_ - s * ez_;
  const Vec3 phat = -sp * ex_ + cp * ey_;
  const double m = incident_.amplitude().mantissa();
  FieldSample out;
  out.exponent = exponent;
  out.E = m * (Er * rhat + Eth * that + Eph * phat);
  out.H = m * (Hr * rhat + Hth * that + Hph * phat);
  out.curlE = -tau_ * cfg_.medium.mu() * out.H;
  return out;
}

FieldSample ModalSolution::incident_at(const Vec3& x) const {
  const double r = (x - modal_.sphere.center).norm();
  if (!(r < L_ - cfg_.eta)) throw Error(ErrorKind::invalid_argument, "solver: incident series used outside its ball");
  return evaluate(x, incident_radial(r), incident_.amplitude().exponent() + kappa_ * r - Z_);
}

FieldSample ModalSolution::scattered_at(const Vec3& x) const {
  const double R = modal_.sphere.radius;
  const double r = (x - modal_.sphere.center).norm();
  if (r < R * (1.0 - 1e-12)) throw Error(ErrorKind::invalid_argument, "solver: scattered field requested inside the sphere");
  const auto b = std::abs(r - R) <= 1e-12 * R ? surface_ : modified_spherical_bessel(n_max_, kappa_ * r);
  return evaluate(x, scattered_radial(b), incident_.amplitude().exponent() + 2.0 * rho_ - Z_ - kappa_ * r);
}

std::vector<FieldSample> ModalSolution::surface_reflected_fields(const SurfaceQuadrature& quad) const {
  const double R = modal_.sphere.radius;
  const Radial radial = scattered_radial(surface_);
  const double exponent = incident_.amplitude().exponent() + rho_ - Z_;
  std::vector<FieldSample> out;
  out.reserve(quad.nodes.size());
  for (const auto& node : quad.nodes) {
    if (std::abs((node.x - modal_.sphere.center).norm() - R) > 1e-9 * R) {
      throw Error(ErrorKind::invalid_argument, "solver: quadrature node off the sphere surface");
    }
    out.push_back(evaluate(node.x, radial, exponent));
  }
  return out;
}

BoundaryResidual ModalSolution::boundary_residual(const SurfaceQuadrature& quad,
                                                  const std::vector<FieldSample>& reflected) const {
  const double ref = incident_.amplitude().exponent() - kappa_ * (L_ - modal_.sphere.radius);
  const double lam = modal_.lambda;
  std::vector<double> res(quad.nodes.size()), mag(quad.nodes.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    const auto& node = quad.nodes[i];
    const auto inc = incident_.sample(node.x);
    const Vec3 We = inc.scaled_E().at_exponent(ref) + reflected[i].scaled_E().at_exponent(ref);
    const Vec3 Wm = inc.scaled_H().at_exponent(ref) + reflected[i].scaled_H().at_exponent(ref);
    const Vec3& nu = node.nu;
    if (std::isinf(lam)) {
      res[i] = nu.cross(We).norm();
      mag[i] = We.norm();
    } else {
      res[i] = (nu.cross(Wm.cross(nu)) + lam * nu.cross(We)).norm();
      mag[i] = We.norm() + Wm.norm();
    }
    peak = std::max(peak, mag[i]);
  }
  BoundaryResidual out;
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (peak > 0.0) out.max_global = std::max(out.max_global, res[i] / peak);
    if (mag[i] >= 1e-6 * peak && mag[i] > 0.0) {
      out.max_resolvable = std::max(out.max_resolvable, res[i] / mag[i]);
      ++out.resolvable_nodes;
    }
  }
  return out;
}

ExpansionCheck ModalSolution::check_expansion() const {
  ExpansionCheck out;
  const double R = modal_.sphere.radius;
  const double d = L_ - R;
  // Nodes where the field is within 1e-6 of its peak.
  const double r_star = d + std::log(1e6) / kappa_;
  const double cmax = std::clamp((R * R + L_ * L_ - r_star * r_star) / (2.0 * R * L_), -1.0, 1.0);
  const double theta_max = std::acos(cmax);
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Radial radial = incident_radial(R);
  const double exponent = incident_.amplitude().exponent() + rho_ - Z_;
  for (int k = 0; k < modal_.expansion_checks; ++k) {
    const double th = theta_max * uni(rng);
    const double ph = 2.0 * std::numbers::pi * uni(rng);
    const Vec3 x = modal_.sphere.center +
                   R * (std::sin(th) * (std::cos(ph) * ex_ + std::sin(ph) * ey_) + std::cos(th) * ez_);
    const auto series = evaluate(x, radial, exponent);
    const auto exact = incident_.sample(x);
    const double ref = exact.exponent;
    const Vec3 dE = series.scaled_E().at_exponent(ref) - exact.E;
    const Vec3 dH = series.scaled_H().at_exponent(ref) - exact.H;
    out.max_error = std::max({out.max_error, dE.norm() / exact.E.norm(), dH.norm() / exact.H.norm()});
    ++out.points;
  }
  return out;
}

ScaledReal ModalSolution::source_pairing() const {
  const auto s = scattered_at(cfg_.p);
  const double eps = cfg_.medium.epsilon(), mu = cfg_.medium.mu();
  return ScaledReal(-4.0 * std::numbers::pi / (eps * mu)) * incident_.amplitude() *
         ScaledReal(cfg_.a.dot(s.E), s.exponent);
}

}  // namespace enclosure
