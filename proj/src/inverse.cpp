// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "error.hpp"

namespace enclosure {
namespace {

void require_series(const std::vector<IndicatorSample>& samples, std::size_t min_samples) {
  if (samples.size() < min_samples) {
    throw Error(ErrorKind::extraction, "need at least " + std::to_string(min_samples) + " tau samples, got " +
                                           std::to_string(samples.size()));
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].tau > samples[i - 1].tau)) throw Error(ErrorKind::extraction, "tau samples must increase");
  }
  if (samples.back().tau < 10.0 * samples.front().tau * (1.0 - 1e-12)) {
    throw Error(ErrorKind::extraction, "tau samples must span at least one decade");
  }
  for (const auto& s : samples) {
    if (s.value.is_zero() || !s.value.is_finite()) {
      throw Error(ErrorKind::extraction, "indicator vanishes or is not finite at tau = " + std::to_string(s.tau));
    }
  }
}

}  // namespace

DistanceResult extract_distance(const std::vector<IndicatorSample>& samples, const MediumParams& medium,
                                const DistanceOptions& opts) {
  if (opts.mode != DistanceFit::basic) {
    throw Error(ErrorKind::invalid_argument, "source-normalized distance fit needs the probe configuration");
  }
  require_series(samples, opts.min_samples);
  const std::size_t n = samples.size();
  for (std::size_t b = 0; b + opts.min_samples <= n; ++b) {
    const std::size_t m = n - b;
    Eigen::MatrixXd A(m, 3);
    Eigen::VectorXd y(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double t = samples[b + i].tau;
      A.row(i) << 1.0, t, std::log(t);
      y(i) = samples[b + i].value.log_abs();
    }
    auto fit = least_squares(A, y);
    if (fit.r2 < opts.r2_gate) continue;
    DistanceResult out;
    out.slope = fit.coef(1);
    out.d_hat = -out.slope / (2.0 * medium.wavespeed_inv());
    out.window_begin = b;
    out.window_end = n;
    out.r2 = fit.r2;
    out.mode = DistanceFit::basic;
    out.fit = std::move(fit);
    if (!(out.d_hat > 0.0)) throw Error(ErrorKind::extraction, "log-slope is not negative; no exponential decay");
    return out;
  }
  throw Error(ErrorKind::extraction, "log|I| is not linear in tau on any window (R^2 gate)");
}

DistanceResult extract_distance(const std::vector<IndicatorSample>& samples, const ProbeConfig& cfg,
                                const DistanceOptions& opts) {
  if (opts.mode == DistanceFit::basic) return extract_distance(samples, cfg.medium, opts);
  require_series(samples, opts.min_samples);
  const std::size_t n = samples.size();
  const int cols = 2 + opts.order;
  for (std::size_t b = 0; b + opts.min_samples <= n; ++b) {
    const std::size_t m = n - b;
    Eigen::MatrixXd A(m, cols);
    Eigen::VectorXd y(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double t = samples[b + i].tau;
      A(i, 0) = 1.0;
      A(i, 1) = t;
      for (int k = 1; k <= opts.order; ++k) A(i, 1 + k) = std::pow(t, -k);
      const double src = source_factor(cfg.medium, cfg.eta, t).log_abs() + std::log(std::abs(pulse_laplace(cfg.profile, t)));
      y(i) = samples[b + i].value.log_abs() - 2.0 * src;
    }
    auto fit = least_squares(A, y);
    if (fit.r2 < opts.r2_gate) continue;
    DistanceResult out;
    out.slope = fit.coef(1);
    out.d_hat = -out.slope / (2.0 * cfg.medium.wavespeed_inv()) - cfg.eta;
    out.window_begin = b;
    out.window_end = n;
    out.r2 = fit.r2;
    out.mode = DistanceFit::source_normalized;
    out.fit = std::move(fit);
    if (!(out.d_hat > 0.0)) throw Error(ErrorKind::extraction, "fitted decay does not clear the source ball");
    return out;
  }
  throw Error(ErrorKind::extraction, "normalized log|I| is not linear in tau on any window (R^2 gate)");
}

CoefficientResult extract_coefficient(const std::vector<IndicatorSample>& samples, double dist,
                                      const ProbeConfig& cfg, const CoefficientOptions& opts) {
  if (!(dist > 0.0)) throw Error(ErrorKind::invalid_argument, "coefficient: distance must be positive");
  if (opts.order < 0) throw Error(ErrorKind::invalid_argument, "coefficient: order must be >= 0");
  const std::size_t need = static_cast<std::size_t>(opts.order) + 3;
  const std::size_t n = samples.size();
  const std::size_t keep =
      std::max(need, static_cast<std::size_t>(std::ceil(opts.tail_fraction * static_cast<double>(n))));
  if (n < keep) throw Error(ErrorKind::extraction, "coefficient: too few samples for the extrapolation order");

  CoefficientResult out;
  out.order = opts.order;
  for (std::size_t i = n - keep; i < n; ++i) {
    const auto& s = samples[i];
    if (s.value.is_zero()) throw Error(ErrorKind::extraction, "coefficient: indicator vanishes in the tail");
    out.tau.push_back(s.tau);
    out.y.push_back(opts.normalize_source ? scaled_value_normalized(s.value, s.tau, dist, cfg)
                                          : scaled_value(s.value, s.tau, dist, cfg));
  }
  const bool positive = out.y.front() > 0.0;
  for (double v : out.y) {
    if ((v > 0.0) != positive) throw Error(ErrorKind::extraction, "coefficient: sign changes across the tau tail");
  }

  // Residual growth means the scaling distance is too large, decay means too small.
  const std::size_t m = out.tau.size();
  Eigen::MatrixXd A(m, 2 + opts.order);
  Eigen::VectorXd ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = out.tau[i];
    for (int k = 1; k <= opts.order; ++k) A(i, 1 + k) = std::pow(out.tau[i], -k);
    ly(i) = std::log(std::abs(out.y[i]));
  }
  const auto growth = least_squares(A, ly);
  out.growth_ratio = growth.coef(1) / (2.0 * cfg.medium.wavespeed_inv() * dist);
  if (out.growth_ratio > opts.divergence_tol) {
    throw Error(ErrorKind::extraction, "coefficient: scaled indicator grows exponentially (distance too large, ratio " +
                                           std::to_string(out.growth_ratio) + ")");
  }
  if (out.growth_ratio < -opts.divergence_tol) {
    throw Error(ErrorKind::extraction, "coefficient: scaled indicator decays exponentially (distance too small, ratio " +
                                           std::to_string(out.growth_ratio) + ")");
  }

  out.fit = fit_inverse_powers(out.tau, out.y, opts.order);
  out.L = out.fit.coef(0);
  return out;
}

double calF_from_coefficient(double L, const ProbeConfig& cfg, double d, double nu_cross_a_sq,
                             LimitConstant constant) {
  if (!(nu_cross_a_sq > 1e-12)) {
    throw Error(ErrorKind::extraction, "polarization is parallel to the normal at the nearest point");
  }
  if (!(d > cfg.eta)) throw Error(ErrorKind::invalid_argument, "calF: d must exceed eta");
  const double G = std::pow(cfg.eta / d, 2);
  return L / (0.5 * std::numbers::pi * G * limit_constant(cfg.medium, constant) * nu_cross_a_sq);
}

double calF_forward(double r, double H, double Kg, double s) {
  const double det = hessian_det(H, Kg, s);
  if (!(det > 0.0)) throw Error(ErrorKind::hypothesis, "distance Hessian is degenerate at this probe");
  return r / std::sqrt(det);
}

CurvatureSolution solve_curvatures(const std::array<double, 3>& F, const std::array<double, 3>& s) {
  for (int i = 0; i < 3; ++i) {
    if (!(s[i] > 0.0)) throw Error(ErrorKind::invalid_argument, "curvature solve: s must be positive");
    for (int j = 0; j < i; ++j) {
      if (std::abs(s[i] - s[j]) <= 1e-12 * std::max(s[i], s[j])) {
        throw Error(ErrorKind::invalid_argument, "curvature solve: probe distances must be distinct");
      }
    }
  }
  if (F[0] == 0.0 || F[1] == 0.0 || F[2] == 0.0) {
    throw Error(ErrorKind::extraction, "curvature solve: vanishing coefficient; admittance may equal lambda0");
  }
  if ((F[0] > 0) != (F[1] > 0) || (F[0] > 0) != (F[2] > 0)) {
    throw Error(ErrorKind::extraction, "curvature solve: coefficients disagree in sign");
  }
  Eigen::Matrix2d M;
  Eigen::Vector2d rhs;
  for (int j = 0; j < 2; ++j) {
    const double a2 = F[j] * F[j], b2 = F[j + 1] * F[j + 1];
    M(j, 0) = -(a2 * s[j] - b2 * s[j + 1]);
    M(j, 1) = a2 - b2;
    rhs(j) = b2 * s[j + 1] * s[j + 1] - a2 * s[j] * s[j];
  }
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(M);
  const auto sv = svd.singularValues();
  if (!(sv(1) > 1e-14 * sv(0))) throw Error(ErrorKind::extraction, "curvature solve: singular system");
  const Eigen::Vector2d x = M.partialPivLu().solve(rhs);
  return {0.5 * x(0), x(1), sv(0) / sv(1)};
}

AdmittanceRecovery recover_lambda(const std::array<double, 3>& F, const std::array<double, 3>& s, double H,
                                  double Kg, const MediumParams& medium) {
  AdmittanceRecovery out;
  const double l0 = medium.lambda0();
  if (F[0] == 0.0 && F[1] == 0.0 && F[2] == 0.0) {
    out.r = 0.0;
    out.lambda = l0;
    out.diagnostics.push_back({"vanishing_signal", "all coefficients vanish; admittance equals lambda0"});
    return out;
  }
  double r2 = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double det = hessian_det(H, Kg, s[j]);
    if (!(det > 0.0)) throw Error(ErrorKind::hypothesis, "recovered curvatures give a degenerate distance Hessian");
    r2 += F[j] * F[j] * det;
  }
  r2 /= 3.0;
  out.r = std::copysign(std::sqrt(r2), F[0]);
  if (!(std::abs(out.r) < 1.0)) {
    throw Error(ErrorKind::extraction, "recovered reflection factor |r| = " + std::to_string(std::abs(out.r)) +
                                           " is not below 1");
  }
  out.lambda = l0 * (1.0 + out.r) / (1.0 - out.r);
  return out;
}

GateResult observation_time_gate(double T, double dist, const MediumParams& medium) {
  GateResult g;
  g.margin = T - 2.0 * medium.wavespeed_inv() * dist;
  g.signal_free = g.margin <= 0.0;
  return g;
}

ReconstructionReport run_reconstruction(const Obstacle& obstacle, const ReconstructionConfig& cfg) {
  ReconstructionReport rep;
  const auto stage_error = [](const Error& e, const std::string& stage) {
    return Error(e.kind(), e.what(), e.stage().empty() ? stage : e.stage());
  };

  // Probe line.
  NearestPointData near;
  try {
    near = nearest_points(obstacle, cfg.p0);
  } catch (const Error& e) {
    throw stage_error(e, "probe_line");
  }
  if (near.points.size() != 1) {
    throw Error(ErrorKind::hypothesis, "starting probe has " + std::to_string(near.points.size()) +
                                           " nearest points; a unique one is needed", "probe_line");
  }
  const auto& np = near.points.front();
  rep.q = np.q;
  rep.nu = np.nu;
  Vec3 a = cfg.a.value_or(np.t1);
  if (std::abs(a.norm() - 1.0) > 1e-12) throw Error(ErrorKind::config, "polarization must be a unit vector", "probe_line");
  const double s1 = 1.0 / near.d;
  for (int j = 0; j < 3; ++j) {
    if (!(cfg.s_ratios[j] >= 1.0)) {
      throw Error(ErrorKind::config, "probe s ratios must be >= 1 (probes on the segment toward q)", "probe_line");
    }
    rep.s[j] = s1 * cfg.s_ratios[j];
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const IndicatorKind kind =
      cfg.source == DataSource::exact ? IndicatorKind::I_exact : IndicatorKind::I_asymptotic_model;

  // Indicator data.
  rep.probes.resize(3);
  std::array<ProbeConfig, 3> probes;
  bool all_zero = true;
  for (int j = 0; j < 3; ++j) {
    auto& st = rep.probes[j];
    st.s = rep.s[j];
    st.p = np.q + np.nu / rep.s[j];
    st.d_true = 1.0 / rep.s[j];
    st.nu_cross_a_sq = np.nu.cross(a).squaredNorm();
    ProbeConfig pc{st.p, cfg.eta, a, cfg.profile, cfg.medium};
    probes[j] = pc;
    try {
      pc.validate();
      pc.check_disjoint(obstacle);
      SeriesOptions so;
      so.source = cfg.source;
      so.quadrature = cfg.quadrature;
      so.threads = cfg.threads;
      so.probe_id = "probe" + std::to_string(j + 1);
      st.samples = select_kind(indicator_series(obstacle, pc, cfg.grid, so), kind);
    } catch (const Error& e) {
      throw stage_error(e, "data");
    }
    for (auto& smp : st.samples) {
      if (cfg.noise > 0.0) smp.value *= ScaledReal(1.0 + cfg.noise * normal(rng));
      if (!smp.value.is_zero()) all_zero = false;
    }
  }
  if (all_zero) {
    rep.r_hat = 0.0;
    rep.lambda_hat = cfg.medium.lambda0();
    rep.H_hat = rep.Kg_hat = std::numeric_limits<double>::quiet_NaN();
    rep.diagnostics.push_back({"vanishing_signal", "indicator vanishes at every probe; admittance equals lambda0"});
    return rep;
  }

  // Distance, observation-time gate, coefficient, F.
  for (int j = 0; j < 3; ++j) {
    auto& st = rep.probes[j];
    double dist = 0.0;
    try {
      st.distance = extract_distance(st.samples, probes[j], cfg.distance);
      dist = st.distance.d_hat;
    } catch (const Error& e) {
      throw stage_error(e, "distance");
    }
    dist *= 1.0 + cfg.dist_perturbation;
    const auto gate = observation_time_gate(cfg.profile.T, dist, cfg.medium);
    if (gate.signal_free) {
      throw Error(ErrorKind::extraction,
                  "observation time T = " + std::to_string(cfg.profile.T) + " does not exceed 2 sqrt(mu eps) dist = " +
                      std::to_string(2.0 * cfg.medium.wavespeed_inv() * dist) + " at probe " + std::to_string(j + 1),
                  "gate");
    }
    try {
      st.coefficient = extract_coefficient(st.samples, dist, probes[j], cfg.coefficient);
      st.F = calF_from_coefficient(st.coefficient.L, probes[j], dist + cfg.eta, st.nu_cross_a_sq, cfg.constant);
    } catch (const Error& e) {
      throw stage_error(e, "coefficient");
    }
    rep.F[j] = st.F;
  }
  rep.d_hat = rep.probes[0].distance.d_hat;

  // Curvatures and admittance.
  try {
    const auto cs = solve_curvatures(rep.F, rep.s);
    rep.H_hat = cs.H;
    rep.Kg_hat = cs.Kg;
    rep.condition = cs.condition;
    if (cs.condition > 1e8) {
      rep.diagnostics.push_back({"ill_conditioned", "curvature system condition number " + std::to_string(cs.condition)});
    }
  } catch (const Error& e) {
    throw stage_error(e, "curvature");
  }
  try {
    auto ar = recover_lambda(rep.F, rep.s, rep.H_hat, rep.Kg_hat, cfg.medium);
    rep.r_hat = ar.r;
    rep.lambda_hat = ar.lambda;
    for (auto& d : ar.diagnostics) rep.diagnostics.push_back(std::move(d));
  } catch (const Error& e) {
    throw stage_error(e, "admittance");
  }
  return rep;
}

}  // namespace enclosure
