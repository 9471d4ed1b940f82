// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "kernels.hpp"
#include "scaled.hpp"

namespace enclosure {

struct QuadratureNode {
  Vec3 x = Vec3::Zero();
  Vec3 nu = Vec3::UnitZ();
  double w = 0.0;
  int component = 0;
};

struct SurfaceQuadrature {
  std::vector<QuadratureNode> nodes;
  int level = 0;

  double total_weight() const;
};

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

struct SphereRuleOptions {
  int level = 0;           // polar nodes per panel = base_per_panel * 2^level
  int base_per_panel = 16;
  int azimuth = 64;
};

/// Product rule on one sphere with its pole along `pole` (unit). Polar panels
/// break at sigma * {0, 1/2, 1, 2, 4, ...} up to pi, with
/// sigma = 1 / (R sqrt(kappa (1/d + 1/R))) the concentration width of
/// e^{-2 kappa |x - p|} around the pole. kappa <= 0 gives a single panel.
SurfaceQuadrature sphere_rule(const Sphere& s, const Vec3& pole, double kappa, double d,
                              const SphereRuleOptions& opts = {}, int component = 0);

/// Per-triangle 7-point rules; triangles within 3/sqrt(kappa) of a nearest
/// point are split until their edges fall below 1/(2 sqrt(kappa)) (refined
/// further by `level`). Triangles whose integrand weight e^{-2 kappa (r - d)}
/// underflows are dropped.
SurfaceQuadrature mesh_rule(const TriMesh& mesh, const Vec3& p, const NearestPointData& nearest, double kappa,
                            int level = 0);

/// Rule for any obstacle, clustered toward the nearest points of p.
SurfaceQuadrature build_rule(const Obstacle& obstacle, const Vec3& p, const NearestPointData& nearest,
                             double kappa, int level);

double pairwise_sum(const std::vector<double>& terms);

using ScalarIntegrand = std::function<double(const QuadratureNode&)>;

/// Weighted sum with pairwise summation; throws a quadrature error naming the
/// node when the integrand is not finite.
double integrate(const SurfaceQuadrature& quad, const ScalarIntegrand& f);
Vec3 integrate_vec(const SurfaceQuadrature& quad, const std::function<Vec3(const QuadratureNode&)>& f);

struct AdaptiveResult {
  double value = 0.0;
  int level = 0;
  double last_change = 0.0;  // relative difference of the final two levels
  bool converged = false;
};

/// Doubles the rule (level, level+1, ...) until two successive values agree to
/// rtol or max_level is reached.
AdaptiveResult integrate_adaptive(const std::function<SurfaceQuadrature(int)>& rule, const ScalarIntegrand& f,
                                  double rtol = 1e-8, int max_level = 5);

/// tau e^{2 kappa d} int A v^2 dS with the exponential applied per node as
/// e^{-2 kappa (|x - p| - d)}.
double laplace_scaled_integral(const SurfaceQuadrature& quad, const Vec3& p, const MediumParams& medium, double tau,
                               double d, const SurfaceField& A);

/// Same integral assembled directly from v; underflows once kappa d is large.
double laplace_scaled_integral_naive(const SurfaceQuadrature& quad, const Vec3& p, const MediumParams& medium,
                                     double tau, double d, const SurfaceField& A);

}  // namespace enclosure
