// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "fitting.hpp"
#include "indicator.hpp"

namespace enclosure {

enum class DistanceFit {
  basic,              // log|I| = c0 + c1 tau + c2 log tau
  source_normalized,  // log|I/(K f~)^2| = b0 + b1 tau + sum_k c_k tau^-k
};

struct DistanceOptions {
  DistanceFit mode = DistanceFit::source_normalized;
  double r2_gate = 1.0 - 1e-6;
  int min_samples = 8;
  int order = 2;  // inverse-power terms in the normalized fit
};

struct DistanceResult {
  double d_hat = 0.0;  // estimate of dist(D, B)
  double slope = 0.0;  // fitted d log|I| / d tau
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
  double r2 = 0.0;
  DistanceFit mode = DistanceFit::basic;
  LinearFit fit;
};

/// Log-slope distance: d_hat = -slope / (2 sqrt(mu eps)) over the largest
/// trailing window whose fit passes the linearity gate.
DistanceResult extract_distance(const std::vector<IndicatorSample>& samples, const MediumParams& medium,
                                const DistanceOptions& opts = {DistanceFit::basic});
DistanceResult extract_distance(const std::vector<IndicatorSample>& samples, const ProbeConfig& cfg,
                                const DistanceOptions& opts = {});

struct CoefficientOptions {
  int order = 2;                 // y = L + c1/tau + ... + c_order/tau^order
  double tail_fraction = 0.6;    // trailing share of the samples used
  bool normalize_source = true;  // divide out (K/K_asym)^2
  double divergence_tol = 5e-4;  // |b| / (2 sqrt(mu eps) dist) allowed for the growth rate b of log|y|
};

struct CoefficientResult {
  double L = 0.0;
  int order = 0;
  std::vector<double> tau;
  std::vector<double> y;
  double growth_ratio = 0.0;  // b / (2 sqrt(mu eps) dist)
  LinearFit fit;
};

/// Extrapolates y(tau) = tau^2 e^{2 tau sqrt(mu eps) dist} I / f~^2 to tau -> inf.
CoefficientResult extract_coefficient(const std::vector<IndicatorSample>& samples, double dist,
                                      const ProbeConfig& cfg, const CoefficientOptions& opts = {});

/// F = L / [(pi/2)(eta/d)^2 C |nu_q x a|^2] with d = d(p) and C from limit_constant.
double calF_from_coefficient(double L, const ProbeConfig& cfg, double d, double nu_cross_a_sq,
                             LimitConstant constant = LimitConstant::standard);

/// Forward model F = r / sqrt(s^2 - 2 H s + K).
double calF_forward(double r, double H, double Kg, double s);

struct CurvatureSolution {
  double H = 0.0;
  double Kg = 0.0;
  double condition = 0.0;
};

/// Solves F_j^2 (s_j^2 - 2 H s_j + K) = r^2 (j = 1..3) for (2H, K) by
/// differencing consecutive equations.
CurvatureSolution solve_curvatures(const std::array<double, 3>& F, const std::array<double, 3>& s);

struct AdmittanceRecovery {
  double r = 0.0;
  double lambda = 0.0;
  Diagnostics diagnostics;
};

/// r = sign(F_1) sqrt(mean F_j^2 (s_j^2 - 2 H s_j + K)), lambda = lambda0 (1 + r)/(1 - r).
AdmittanceRecovery recover_lambda(const std::array<double, 3>& F, const std::array<double, 3>& s, double H,
                                  double Kg, const MediumParams& medium);

struct GateResult {
  bool signal_free = false;
  double margin = 0.0;  // T - 2 sqrt(mu eps) dist
};

/// e^{tau T} I tends to zero when T <= 2 sqrt(mu eps) dist.
GateResult observation_time_gate(double T, double dist, const MediumParams& medium);

struct ReconstructionConfig {
  Vec3 p0 = Vec3(0, 0, 2);  // starting probe; the line runs from p0 to its nearest point
  std::array<double, 3> s_ratios{1.0, 1.5, 2.5};
  double eta = 0.1;
  std::optional<Vec3> a;  // default: a unit tangent at the nearest point
  PulseProfile profile;
  MediumParams medium;
  DataSource source = DataSource::exact;
  TauGrid grid = TauGrid::geometric(20.0, 200.0, 1.25);
  double noise = 0.0;  // multiplicative, relative standard deviation
  unsigned long long seed = 1;
  DistanceOptions distance;
  CoefficientOptions coefficient;
  QuadratureOptions quadrature;
  LimitConstant constant = LimitConstant::standard;
  double dist_perturbation = 0.0;  // relative offset applied to every extracted distance
  int threads = 1;
};

struct ProbeStage {
  Vec3 p = Vec3::Zero();
  double d_true = 0.0;  // geometric d(p)
  double s = 0.0;       // 1/d(p)
  double nu_cross_a_sq = 0.0;
  DistanceResult distance;
  CoefficientResult coefficient;
  double F = 0.0;
  std::vector<IndicatorSample> samples;
};

struct ReconstructionReport {
  Vec3 q = Vec3::Zero();
  Vec3 nu = Vec3::UnitZ();
  std::array<double, 3> s{};
  std::array<double, 3> F{};
  double d_hat = 0.0;  // dist(D, B_1) from the first probe
  double H_hat = 0.0;
  double Kg_hat = 0.0;
  double r_hat = 0.0;
  double lambda_hat = 0.0;
  double condition = 0.0;
  std::vector<ProbeStage> probes;
  Diagnostics diagnostics;
};

/// Steps 1-8: three probes on the segment toward the nearest point, indicator
/// data, distance and coefficient extraction, curvature and admittance solve.
/// Stage errors carry the stage name.
ReconstructionReport run_reconstruction(const Obstacle& obstacle, const ReconstructionConfig& cfg);

}  // namespace enclosure
