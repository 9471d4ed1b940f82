// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "fields.hpp"
#include "fitting.hpp"
#include "geometry.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "solver.hpp"

namespace enclosure {

enum class IndicatorKind { J, J_star, J_infty, E_energy, I_exact, I_asymptotic_model };

const char* to_string(IndicatorKind kind);
IndicatorKind indicator_kind_from_string(const std::string& s);

struct IndicatorSample {
  double tau = 0.0;
  ScaledReal value;
  IndicatorKind kind = IndicatorKind::J;
  std::string obstacle_id;
  std::string probe_id;
  std::string lambda_description;
};

struct QuadratureOptions {
  double rtol = 1e-8;
  int max_level = 4;
  int fixed_level = -1;  // >= 0 disables the level search
};

/// Surface functionals of the closed-form probe fields:
///   J    = (tau/eps) int (nu x V_m).V_em dS
///   J*   = (tau/eps) int r(lambda) (nu x V_m).V_em dS,  r = (lambda - lambda0)/(lambda + lambda0)
///   J_oo = (tau/eps) int nu x (V_e x nu) . nu x V_m dS
/// with V_em = nu x (V_e x nu) - (1/lambda) nu x V_m.
class SurfaceIndicators {
 public:
  SurfaceIndicators(const Obstacle& obstacle, const ProbeConfig& cfg, QuadratureOptions opts = {});

  const NearestPointData& nearest() const { return nearest_; }
  const Obstacle& obstacle() const { return obstacle_; }
  const ProbeConfig& probe() const { return cfg_; }

  ScaledReal J(double tau) const;
  /// (1/(mu eps)) int (nu x V_e).curl V_e dS - (tau/eps) int (1/lambda)|V_m x nu|^2 dS
  ScaledReal J_two_term(double tau) const;
  ScaledReal J_star(double tau) const;
  ScaledReal J_infty(double tau) const;
  /// J with the admittance replaced by a constant.
  ScaledReal J_with_lambda(double tau, double lambda) const;
  /// int |V_em|^2 dS
  ScaledReal Vem_norm_sq(double tau) const;
  /// Asymptotic model J + J*.
  ScaledReal model(double tau) const;

 private:
  using NodeFn = std::function<double(const FieldSample&, const QuadratureNode&, double lambda)>;
  ScaledReal assemble(double tau, double prefactor, const NodeFn& f) const;

  Obstacle obstacle_;
  ProbeConfig cfg_;
  QuadratureOptions opts_;
  NearestPointData nearest_;
};

/// E(tau) = (tau/eps) int [R_m.(nu x R_e) + (1/lambda)|R_m x nu|^2] dS from
/// reflected surface fields. Throws a solver error when the value is below
/// -1e-8 of its absolute integrand mass.
ScaledReal E_energy(const std::vector<FieldSample>& reflected, const SurfaceQuadrature& quad, double lambda,
                    const MediumParams& medium, double tau);

struct ExactIndicator {
  double tau = 0.0;
  ScaledReal J;
  ScaledReal J_star;
  ScaledReal E;
  ScaledReal I;          // J + E
  ScaledReal I_pairing;  // source ball pairing of the reflected field
  int n_max = 0;
  int level = 0;
  double tail = 0.0;
  double expansion_error = 0.0;
  double bc_residual = 0.0;
  double bc_residual_global = 0.0;
  Diagnostics diagnostics;
};

struct ExactOptions {
  QuadratureOptions quadrature;
  int n_max = 0;  // 0 selects the adaptive truncation
};

/// Solver-backed indicator for a single sphere with constant admittance.
ExactIndicator indicator_exact(const Obstacle& obstacle, const ProbeConfig& cfg, double tau,
                               const ExactOptions& opts = {});

enum class LimitFormula { indicator_limit, J_limit, Jstar_limit, Vem_norm_limit, Jinfty_limit };

const char* to_string(LimitFormula f);

struct PointContribution {
  Vec3 q = Vec3::Zero();
  double k_q = 0.0;
  double lambda = 0.0;
  double r = 0.0;            // (lambda - lambda0)/(lambda + lambda0)
  double nu_cross_a_sq = 0.0;
  double contribution = 0.0;
};

struct PredictedLimit {
  LimitFormula formula = LimitFormula::indicator_limit;
  double value = 0.0;
  std::vector<PointContribution> per_q;
};

struct PredictedLimits {
  double d = 0.0;     // d(p)
  double dist = 0.0;  // d(p) - eta
  std::vector<PredictedLimit> limits;
  Diagnostics diagnostics;

  const PredictedLimit& get(LimitFormula f) const;
};

/// Closed-form limits:
///   indicator_limit     (pi/2)(eta/d)^2 (lam0^2/eps^4) sum k_q r_q |nu_q x a|^2
///   J_limit     (pi/4)(eta/d)^2 (lam0^3/eps^4) sum k_q (1/lam0 - 1/lam_q) |nu_q x a|^2
///   Jstar_limit J_limit with an extra r_q per point
///   Vem_norm_limit      (pi/4)(eta/d)^2 (lam0^3/eps^3) sum k_q (1/lam0 - 1/lam_q)^2 |nu_q x a|^2
///   Jinfty_limit  (pi/4)(eta/d)^2 (lam0^2/eps^4) sum k_q |nu_q x a|^2
/// The first four are limits of tau^2 e^{2 tau c dist} X / f~^2 (tau^3 for
/// Vem_norm_limit) with c = sqrt(mu eps) and dist = d - eta.
PredictedLimits predicted_limits(const Obstacle& obstacle, const ProbeConfig& cfg);

/// Constant in front of the curvature/admittance sum in the main limit.
enum class LimitConstant { standard, alternative };
double limit_constant(const MediumParams& medium, LimitConstant c);

/// tau^power e^{2 tau c dist} value / f~^2.
double scaled_value(const ScaledReal& value, double tau, double dist, const ProbeConfig& cfg, int power = 2);
/// scaled_value with the exact source factor divided out: multiplies by
/// (K_asym / K)^2, which tends to 1.
double scaled_value_normalized(const ScaledReal& value, double tau, double dist, const ProbeConfig& cfg,
                               int power = 2);

struct RatioLimit {
  double value = 0.0;      // extrapolated lim I(lambda2)/I(lambda1)
  double lower = 0.0;      // min_q r2/r1
  double upper = 0.0;      // max_q r2/r1
  double predicted = 0.0;  // ratio of the two indicator_limit values
  LinearFit fit;
};

/// Extrapolates I2/I1 over the tail of a common tau grid.
RatioLimit ratio_limit(const std::vector<IndicatorSample>& samples2, const std::vector<IndicatorSample>& samples1,
                       const PredictedLimit& limit2, const PredictedLimit& limit1, int order = 2);

enum class DataSource { exact, model };

struct SeriesOptions {
  DataSource source = DataSource::exact;
  QuadratureOptions quadrature;
  int threads = 1;
  std::string probe_id = "probe";
};

/// Indicator values over a tau grid. Exact data yields kinds {J, E_energy,
/// I_exact}; model data yields {J, J_star, I_asymptotic_model}.
std::vector<IndicatorSample> indicator_series(const Obstacle& obstacle, const ProbeConfig& cfg,
                                              const TauGrid& grid, const SeriesOptions& opts);

/// Samples of one kind, in tau order.
std::vector<IndicatorSample> select_kind(const std::vector<IndicatorSample>& samples, IndicatorKind kind);

}  // namespace enclosure
