// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "indicator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "parallel.hpp"

namespace enclosure {

const char* to_string(IndicatorKind kind) {
  switch (kind) {
    case IndicatorKind::J:
      return "J";
    case IndicatorKind::J_star:
      return "J_star";
    case IndicatorKind::J_infty:
      return "J_infty";
    case IndicatorKind::E_energy:
      return "E_energy";
    case IndicatorKind::I_exact:
      return "I_exact";
    case IndicatorKind::I_asymptotic_model:
      return "I_asymptotic_model";
  }
  return "J";
}

IndicatorKind indicator_kind_from_string(const std::string& s) {
  for (auto k : {IndicatorKind::J, IndicatorKind::J_star, IndicatorKind::J_infty, IndicatorKind::E_energy,
                 IndicatorKind::I_exact, IndicatorKind::I_asymptotic_model}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorKind::config, "unknown indicator kind '" + s + "'");
}

namespace {

using NodeFn = std::function<double(const FieldSample&, const QuadratureNode&, double lambda)>;

// Pairing of two incident fields over a rule; returns the integral relative to
// e^{ref} with ref = 2 (log C0 - kappa d).
double pair_on(const SurfaceQuadrature& quad, const IncidentField& inc, const Obstacle& obstacle, double d,
               const NodeFn& f) {
  const double ref = 2.0 * (inc.amplitude().exponent() - inc.kappa() * d);
  return integrate(quad, [&](const QuadratureNode& node) {
    const auto s = inc.sample(node.x);
    const double lambda = obstacle.lambda_at(node.x, node.component);
    return f(s, node, lambda) * std::exp(2.0 * s.exponent - ref);
  });
}

double J_node(const FieldSample& s, const QuadratureNode& n, double lambda) {
  return n.nu.cross(s.H).dot(V_em0(s, n.nu, lambda));
}

}  // namespace

SurfaceIndicators::SurfaceIndicators(const Obstacle& obstacle, const ProbeConfig& cfg, QuadratureOptions opts)
    : obstacle_(obstacle), cfg_(cfg), opts_(opts) {
  cfg_.validate();
  nearest_ = nearest_points(obstacle_, cfg_.p);
  if (!(nearest_.d > cfg_.eta)) throw Error(ErrorKind::geometry, "probe: source ball meets the obstacle");
}

ScaledReal SurfaceIndicators::assemble(double tau, double prefactor, const NodeFn& f) const {
  const IncidentField inc(cfg_, tau);
  const double kappa = inc.kappa();
  const double ref = 2.0 * (inc.amplitude().exponent() - kappa * nearest_.d);
  auto rule = [&](int level) { return build_rule(obstacle_, cfg_.p, nearest_, kappa, level); };
  double value;
  if (opts_.fixed_level >= 0) {
    value = pair_on(rule(opts_.fixed_level), inc, obstacle_, nearest_.d, f);
  } else {
    const auto res = integrate_adaptive(
        rule,
        [&](const QuadratureNode& node) {
          const auto s = inc.sample(node.x);
          return f(s, node, obstacle_.lambda_at(node.x, node.component)) * std::exp(2.0 * s.exponent - ref);
        },
        opts_.rtol, obstacle_.is_sphere_set() ? opts_.max_level : std::min(opts_.max_level, 2));
    value = res.value;
  }
  return ScaledReal(prefactor * value, ref);
}

ScaledReal SurfaceIndicators::J(double tau) const {
  return assemble(tau, tau / cfg_.medium.epsilon(), J_node);
}

ScaledReal SurfaceIndicators::J_two_term(double tau) const {
  const double me = cfg_.medium.mu() * cfg_.medium.epsilon();
  const double te = tau / cfg_.medium.epsilon();
  return assemble(tau, 1.0, [&](const FieldSample& s, const QuadratureNode& n, double lambda) {
    return n.nu.cross(s.E).dot(s.curlE) / me - te * s.H.cross(n.nu).squaredNorm() / lambda;
  });
}

ScaledReal SurfaceIndicators::J_star(double tau) const {
  const double l0 = cfg_.medium.lambda0();
  return assemble(tau, tau / cfg_.medium.epsilon(), [&](const FieldSample& s, const QuadratureNode& n, double lambda) {
    return (lambda - l0) / (lambda + l0) * J_node(s, n, lambda);
  });
}

ScaledReal SurfaceIndicators::J_infty(double tau) const {
  return assemble(tau, tau / cfg_.medium.epsilon(), [](const FieldSample& s, const QuadratureNode& n, double) {
    return n.nu.cross(s.E.cross(n.nu)).dot(n.nu.cross(s.H));
  });
}

ScaledReal SurfaceIndicators::J_with_lambda(double tau, double lambda) const {
  if (!(lambda > 0.0)) throw Error(ErrorKind::invalid_argument, "J: lambda must be positive");
  return assemble(tau, tau / cfg_.medium.epsilon(),
                  [lambda](const FieldSample& s, const QuadratureNode& n, double) { return J_node(s, n, lambda); });
}

ScaledReal SurfaceIndicators::Vem_norm_sq(double tau) const {
  return assemble(tau, 1.0, [](const FieldSample& s, const QuadratureNode& n, double lambda) {
    return V_em0(s, n.nu, lambda).squaredNorm();
  });
}

ScaledReal SurfaceIndicators::model(double tau) const { return J(tau) + J_star(tau); }

ScaledReal E_energy(const std::vector<FieldSample>& reflected, const SurfaceQuadrature& quad, double lambda,
                    const MediumParams& medium, double tau) {
  if (reflected.size() != quad.nodes.size()) {
    throw Error(ErrorKind::invalid_argument, "E_energy: field/node count mismatch");
  }
  if (reflected.empty()) return ScaledReal(0.0);
  double ref = -std::numeric_limits<double>::infinity();
  for (const auto& r : reflected) ref = std::max(ref, 2.0 * r.exponent);
  std::vector<double> terms(quad.nodes.size()), mass(quad.nodes.size());
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    const auto& n = quad.nodes[i];
    const auto& r = reflected[i];
    const double scale = std::exp(2.0 * r.exponent - ref);
    const double a = r.H.dot(n.nu.cross(r.E));
    const double b = std::isinf(lambda) ? 0.0 : r.H.cross(n.nu).squaredNorm() / lambda;
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw Error(ErrorKind::quadrature, "E_energy: non-finite reflected field at a node");
    }
    terms[i] = n.w * (a + b) * scale;
    mass[i] = n.w * (std::abs(a) + b) * scale;
  }
  const double value = pairwise_sum(terms);
  const double total = pairwise_sum(mass);
  if (value < -1e-8 * total) {
    throw Error(ErrorKind::solver, "E_energy is negative beyond round-off; the reflected field is inaccurate");
  }
  return ScaledReal(tau / medium.epsilon() * value, ref);
}

ExactIndicator indicator_exact(const Obstacle& obstacle, const ProbeConfig& cfg, double tau, const ExactOptions& opts) {
  if (!obstacle.is_single_sphere()) {
    throw Error(ErrorKind::invalid_argument, "exact indicator: requires a single sphere obstacle");
  }
  const auto lam = obstacle.admittance().constant_value();
  if (!lam) throw Error(ErrorKind::invalid_argument, "exact indicator: requires a constant admittance");
  const Sphere& sphere = obstacle.spheres()[0];

  ModalConfig modal;
  modal.sphere = sphere;
  modal.lambda = *lam;
  modal.n_max = opts.n_max;
  const ModalSolution sol(cfg, modal, tau);

  const double L = (cfg.p - sphere.center).norm();
  const double d = L - sphere.radius;
  const Vec3 pole = (cfg.p - sphere.center) / L;
  const double l0 = cfg.medium.lambda0();
  const double rfac = std::isinf(*lam) ? 1.0 : (*lam - l0) / (*lam + l0);
  const IncidentField& inc = sol.incident_closed_form();
  const double ref = 2.0 * (inc.amplitude().exponent() - inc.kappa() * d);
  const double te = tau / cfg.medium.epsilon();

  ExactIndicator out;
  out.tau = tau;
  auto evaluate = [&](int level, SurfaceQuadrature& quad, std::vector<FieldSample>& refl) {
    SphereRuleOptions ro;
    ro.level = level;
    quad = sphere_rule(sphere, pole, inc.kappa(), d, ro);
    const double j = pair_on(quad, inc, obstacle, d, J_node);
    refl = sol.surface_reflected_fields(quad);
    const ScaledReal e = E_energy(refl, quad, *lam, cfg.medium, tau);
    return std::make_pair(ScaledReal(te * j, ref), e);
  };

  SurfaceQuadrature quad;
  std::vector<FieldSample> refl;
  const auto& q = opts.quadrature;
  int level = q.fixed_level >= 0 ? q.fixed_level : 0;
  auto [J, E] = evaluate(level, quad, refl);
  if (q.fixed_level < 0) {
    for (int next = 1; next <= q.max_level; ++next) {
      auto [J2, E2] = evaluate(next, quad, refl);
      const ScaledReal big = std::abs(ratio(J2, E2)) > 1.0 ? J2 : E2;
      const double dj = std::abs(ratio(J2 - J, big));
      const double de = std::abs(ratio(E2 - E, big));
      J = J2;
      E = E2;
      level = next;
      if (std::max(dj, de) <= q.rtol) break;
      if (next == q.max_level) {
        out.diagnostics.push_back({"quadrature_unconverged", "surface rule did not reach the requested tolerance"});
      }
    }
  }
  out.J = J;
  out.J_star = ScaledReal(rfac) * J;
  out.E = E;
  out.I = J + E;
  out.I_pairing = sol.source_pairing();
  out.level = level;
  out.n_max = sol.n_max();
  out.tail = sol.tail();
  out.expansion_error = sol.expansion_check().max_error;
  const auto bc = sol.boundary_residual(quad, refl);
  out.bc_residual = bc.max_resolvable;
  out.bc_residual_global = bc.max_global;
  for (const auto& dg : sol.diagnostics()) out.diagnostics.push_back(dg);
  return out;
}

const char* to_string(LimitFormula f) {
  switch (f) {
    case LimitFormula::indicator_limit:
      return "indicator_limit";
    case LimitFormula::J_limit:
      return "J_limit";
    case LimitFormula::Jstar_limit:
      return "Jstar_limit";
    case LimitFormula::Vem_norm_limit:
      return "Vem_norm_limit";
    case LimitFormula::Jinfty_limit:
      return "Jinfty_limit";
  }
  return "indicator_limit";
}

const PredictedLimit& PredictedLimits::get(LimitFormula f) const {
  for (const auto& l : limits) {
    if (l.formula == f) return l;
  }
  throw Error(ErrorKind::invalid_argument, "predicted limit not available");
}

double limit_constant(const MediumParams& medium, LimitConstant c) {
  const double l0 = medium.lambda0();
  const double e = medium.epsilon();
  return c == LimitConstant::standard ? l0 * l0 / (e * e * e * e) : l0 * l0 * l0 * l0 / (e * e);
}

PredictedLimits predicted_limits(const Obstacle& obstacle, const ProbeConfig& cfg) {
  cfg.validate();
  const auto nearest = nearest_points(obstacle, cfg.p);
  if (has_diagnostic(nearest.diagnostics, "degenerate_continuum")) {
    throw Error(ErrorKind::hypothesis, "nearest set is not finite; move the probe toward a nearest point");
  }
  if (has_diagnostic(nearest.diagnostics, "degenerate_hessian")) {
    throw Error(ErrorKind::hypothesis, "degenerate distance Hessian at a nearest point");
  }
  const double l0 = cfg.medium.lambda0();
  const double e = cfg.medium.epsilon();
  const double G = std::pow(cfg.eta / nearest.d, 2);
  const double pi = std::numbers::pi;

  PredictedLimits out;
  out.d = nearest.d;
  out.dist = nearest.d - cfg.eta;
  if (!(out.dist > 0.0)) throw Error(ErrorKind::geometry, "probe: source ball meets the obstacle");

  const LimitFormula formulas[] = {LimitFormula::indicator_limit, LimitFormula::J_limit, LimitFormula::Jstar_limit,
                                   LimitFormula::Vem_norm_limit, LimitFormula::Jinfty_limit};
  bool any_polarized = false;
  bool any_signal = false;
  for (auto f : formulas) {
    PredictedLimit lim;
    lim.formula = f;
    std::vector<double> parts;
    for (const auto& q : nearest.points) {
      PointContribution c;
      c.q = q.q;
      c.k_q = q.k_q;
      c.lambda = obstacle.lambda_at(q.q, q.component);
      c.r = (c.lambda - l0) / (c.lambda + l0);
      c.nu_cross_a_sq = q.nu.cross(cfg.a).squaredNorm();
      const double m = 1.0 / l0 - 1.0 / c.lambda;
      const double base = c.k_q * c.nu_cross_a_sq;
      switch (f) {
        case LimitFormula::indicator_limit:
          c.contribution = pi / 2 * G * (l0 * l0 / std::pow(e, 4)) * base * c.r;
          break;
        case LimitFormula::J_limit:
          c.contribution = pi / 4 * G * (l0 * l0 * l0 / std::pow(e, 4)) * base * m;
          break;
        case LimitFormula::Jstar_limit:
          c.contribution = pi / 4 * G * (l0 * l0 * l0 / std::pow(e, 4)) * base * m * c.r;
          break;
        case LimitFormula::Vem_norm_limit:
          c.contribution = pi / 4 * G * (l0 * l0 * l0 / std::pow(e, 3)) * base * m * m;
          break;
        case LimitFormula::Jinfty_limit:
          c.contribution = pi / 4 * G * (l0 * l0 / std::pow(e, 4)) * base;
          break;
      }
      if (c.nu_cross_a_sq > 1e-12) any_polarized = true;
      if (c.r != 0.0) any_signal = true;
      parts.push_back(c.contribution);
      lim.per_q.push_back(c);
    }
    lim.value = pairwise_sum(parts);
    out.limits.push_back(lim);
  }
  if (!any_polarized) {
    out.diagnostics.push_back({"polarization_parallel", "a is parallel to the normal at every nearest point"});
  }
  if (!any_signal) {
    out.diagnostics.push_back({"vanishing_signal", "lambda equals lambda0 at every nearest point"});
  }
  return out;
}

double scaled_value(const ScaledReal& value, double tau, double dist, const ProbeConfig& cfg, int power) {
  if (value.is_zero()) return 0.0;
  const double ft = pulse_laplace(cfg.profile, tau);
  const double lg = value.log_abs() + power * std::log(tau) + 2.0 * cfg.medium.kappa(tau) * dist -
                    2.0 * std::log(std::abs(ft));
  return value.sign() * std::exp(lg);
}

double scaled_value_normalized(const ScaledReal& value, double tau, double dist, const ProbeConfig& cfg, int power) {
  const double r = source_factor_ratio(cfg.medium, cfg.eta, tau);
  return scaled_value(value, tau, dist, cfg, power) / (r * r);
}

RatioLimit ratio_limit(const std::vector<IndicatorSample>& samples2, const std::vector<IndicatorSample>& samples1,
                       const PredictedLimit& limit2, const PredictedLimit& limit1, int order) {
  if (samples2.size() != samples1.size() || samples2.size() < static_cast<std::size_t>(order + 3)) {
    throw Error(ErrorKind::extraction, "ratio limit: need two sample sets of equal length on a common grid");
  }
  if (limit2.per_q.size() != limit1.per_q.size() || limit2.per_q.empty()) {
    throw Error(ErrorKind::extraction, "ratio limit: per-point breakdowns differ");
  }
  std::vector<double> t, z;
  for (std::size_t i = 0; i < samples2.size(); ++i) {
    if (std::abs(samples2[i].tau - samples1[i].tau) > 1e-12 * samples2[i].tau) {
      throw Error(ErrorKind::extraction, "ratio limit: tau grids differ");
    }
    if (samples1[i].value.is_zero()) throw Error(ErrorKind::extraction, "ratio limit: zero denominator sample");
    t.push_back(samples2[i].tau);
    z.push_back(ratio(samples2[i].value, samples1[i].value));
  }
  const std::size_t n = t.size();
  const std::size_t keep = std::max<std::size_t>(order + 3, n / 2);
  const std::vector<double> tt(t.end() - keep, t.end()), zz(z.end() - keep, z.end());
  RatioLimit out;
  out.fit = fit_inverse_powers(tt, zz, order);
  out.value = out.fit.coef(0);
  out.lower = std::numeric_limits<double>::infinity();
  out.upper = -out.lower;
  for (std::size_t k = 0; k < limit2.per_q.size(); ++k) {
    const double r1 = limit1.per_q[k].r;
    if (r1 == 0.0) throw Error(ErrorKind::hypothesis, "ratio limit: lambda1 equals lambda0 at a nearest point");
    const double q = limit2.per_q[k].r / r1;
    out.lower = std::min(out.lower, q);
    out.upper = std::max(out.upper, q);
  }
  out.predicted = limit1.value != 0.0 ? limit2.value / limit1.value : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::vector<IndicatorSample> indicator_series(const Obstacle& obstacle, const ProbeConfig& cfg, const TauGrid& grid,
                                              const SeriesOptions& opts) {
  grid.validate();
  const std::size_t n = grid.values.size();
  const std::string lam = obstacle.admittance().description();
  auto make = [&](double tau, const ScaledReal& v, IndicatorKind k) {
    return IndicatorSample{tau, v, k, obstacle.id(), opts.probe_id, lam};
  };
  std::vector<std::array<IndicatorSample, 3>> rows(n);
  if (opts.source == DataSource::exact) {
    ExactOptions eo;
    eo.quadrature = opts.quadrature;
    parallel_for(n, opts.threads, [&](std::size_t i) {
      const double tau = grid.values[i];
      const auto ex = indicator_exact(obstacle, cfg, tau, eo);
      rows[i] = {make(tau, ex.J, IndicatorKind::J), make(tau, ex.E, IndicatorKind::E_energy),
                 make(tau, ex.I, IndicatorKind::I_exact)};
    });
  } else {
    const SurfaceIndicators si(obstacle, cfg, opts.quadrature);
    parallel_for(n, opts.threads, [&](std::size_t i) {
      const double tau = grid.values[i];
      const auto j = si.J(tau);
      const auto js = si.J_star(tau);
      rows[i] = {make(tau, j, IndicatorKind::J), make(tau, js, IndicatorKind::J_star),
                 make(tau, j + js, IndicatorKind::I_asymptotic_model)};
    });
  }
  std::vector<IndicatorSample> out;
  out.reserve(3 * n);
  for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::vector<IndicatorSample> select_kind(const std::vector<IndicatorSample>& samples, IndicatorKind kind) {
  std::vector<IndicatorSample> out;
  for (const auto& s : samples) {
    if (s.kind == kind) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.tau < b.tau; });
  return out;
}

}  // namespace enclosure
