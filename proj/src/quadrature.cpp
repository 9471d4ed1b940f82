// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace enclosure {

double SurfaceQuadrature::total_weight() const {
  std::vector<double> w;
  w.reserve(nodes.size());
  for (const auto& n : nodes) w.push_back(n.w);
  return pairwise_sum(w);
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "gauss_legendre: need n >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    w[i] = 2.0 * v * v;
  }
  // Newton polish on P_n for full double accuracy at large n.
  for (int i = 0; i < n; ++i) {
    double t = x[i];
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      t -= p1 / dp;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

SurfaceQuadrature sphere_rule(const Sphere& s, const Vec3& pole, double kappa, double d, const SphereRuleOptions& opts,
                              int component) {
  if (opts.level < 0 || opts.level > 12 || opts.base_per_panel < 1 || opts.azimuth < 1) {
    throw Error(ErrorKind::invalid_argument, "sphere rule: bad refinement options");
  }
  const double pi = std::numbers::pi;
  const double R = s.radius;
  std::vector<double> breaks{0.0};
  if (kappa > 0.0 && d > 0.0) {
    const double sigma = 1.0 / (R * std::sqrt(kappa * (1.0 / d + 1.0 / R)));
    for (double b = 0.5 * sigma; b < 0.75 * pi; b *= 2.0) breaks.push_back(b);
  }
  breaks.push_back(pi);

  const int per_panel = opts.base_per_panel << opts.level;
  std::vector<double> gx, gw;
  gauss_legendre(per_panel, gx, gw);

  const Vec3 u = pole.normalized();
  const auto [e1, e2] = tangent_frame(u);
  const int na = opts.azimuth;
  const double dphi = 2.0 * pi / na;

  SurfaceQuadrature quad;
  quad.level = opts.level;
  quad.nodes.reserve((breaks.size() - 1) * per_panel * na);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    for (int i = 0; i < per_panel; ++i) {
      const double theta = 0.5 * (a + b) + 0.5 * (b - a) * gx[i];
      const double wt = 0.5 * (b - a) * gw[i] * R * R * std::sin(theta) * dphi;
      const double ct = std::cos(theta), st = std::sin(theta);
      for (int j = 0; j < na; ++j) {
        const double ph = (j + 0.5) * dphi;
        const Vec3 n = ct * u + st * (std::cos(ph) * e1 + std::sin(ph) * e2);
        quad.nodes.push_back({s.center + R * n, n, wt, component});
      }
    }
  }
  return quad;
}

namespace {

struct Dunavant7 {
  double l[7][3];
  double w[7];
};

constexpr double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
constexpr double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
constexpr Dunavant7 kRule{{{1.0 / 3, 1.0 / 3, 1.0 / 3},
                           {a1, b1, b1},
                           {b1, a1, b1},
                           {b1, b1, a1},
                           {a2, b2, b2},
                           {b2, a2, b2},
                           {b2, b2, a2}},
                          {0.225, w1, w1, w1, w2, w2, w2}};

struct Tri {
  Vec3 x[3];
  Vec3 n[3];
};

void emit(const Tri& t, std::vector<QuadratureNode>& out) {
  const double area = 0.5 * (t.x[1] - t.x[0]).cross(t.x[2] - t.x[0]).norm();
  for (int k = 0; k < 7; ++k) {
    const auto& l = kRule.l[k];
    const Vec3 x = l[0] * t.x[0] + l[1] * t.x[1] + l[2] * t.x[2];
    const Vec3 n = (l[0] * t.n[0] + l[1] * t.n[1] + l[2] * t.n[2]).normalized();
    out.push_back({x, n, kRule.w[k] * area, 0});
  }
}

double max_edge(const Tri& t) {
  return std::max({(t.x[1] - t.x[0]).norm(), (t.x[2] - t.x[1]).norm(), (t.x[0] - t.x[2]).norm()});
}

void refine(const Tri& t, double target, int depth, std::vector<QuadratureNode>& out) {
  if (depth >= 10 || max_edge(t) <= target) {
    emit(t, out);
    return;
  }
  Vec3 mx[3], mn[3];
  for (int k = 0; k < 3; ++k) {
    mx[k] = 0.5 * (t.x[k] + t.x[(k + 1) % 3]);
    mn[k] = (t.n[k] + t.n[(k + 1) % 3]).normalized();
  }
  refine({{t.x[0], mx[0], mx[2]}, {t.n[0], mn[0], mn[2]}}, target, depth + 1, out);
  refine({{mx[0], t.x[1], mx[1]}, {mn[0], t.n[1], mn[1]}}, target, depth + 1, out);
  refine({{mx[2], mx[1], t.x[2]}, {mn[2], mn[1], t.n[2]}}, target, depth + 1, out);
  refine({{mx[0], mx[1], mx[2]}, {mn[0], mn[1], mn[2]}}, target, depth + 1, out);
}

}  // namespace

SurfaceQuadrature mesh_rule(const TriMesh& mesh, const Vec3& p, const NearestPointData& nearest, double kappa,
                            int level) {
  if (level < 0 || level > 6) throw Error(ErrorKind::invalid_argument, "mesh rule: bad refinement level");
  SurfaceQuadrature quad;
  quad.level = level;
  const double scale = kappa > 0.0 ? 1.0 / std::sqrt(kappa) : std::numeric_limits<double>::infinity();
  const double near_radius = 3.0 * scale;
  const double target = 0.5 * scale / (1 << level);
  for (const auto& tri : mesh.triangles) {
    const Tri t{{mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]},
                {mesh.normals[tri[0]], mesh.normals[tri[1]], mesh.normals[tri[2]]}};
    if (kappa > 0.0) {
      const double r = closest_point_on_triangle(p, t.x[0], t.x[1], t.x[2]).distance;
      if (2.0 * kappa * (r - nearest.d) > 1400.0) continue;
    }
    bool near = false;
    for (const auto& q : nearest.points) {
      if (closest_point_on_triangle(q.q, t.x[0], t.x[1], t.x[2]).distance < near_radius) {
        near = true;
        break;
      }
    }
    if (near) {
      refine(t, target, 0, quad.nodes);
    } else {
      emit(t, quad.nodes);
    }
  }
  return quad;
}

SurfaceQuadrature build_rule(const Obstacle& obstacle, const Vec3& p, const NearestPointData& nearest, double kappa,
                             int level) {
  if (!obstacle.is_sphere_set()) return mesh_rule(obstacle.mesh(), p, nearest, kappa, level);
  SurfaceQuadrature quad;
  quad.level = level;
  const auto& ss = obstacle.spheres();
  for (std::size_t c = 0; c < ss.size(); ++c) {
    const Vec3 pole = (p - ss[c].center).normalized();
    const double dc = (p - ss[c].center).norm() - ss[c].radius;
    SphereRuleOptions opts;
    opts.level = level;
    auto part = sphere_rule(ss[c], pole, kappa, dc, opts, static_cast<int>(c));
    quad.nodes.insert(quad.nodes.end(), part.nodes.begin(), part.nodes.end());
  }
  return quad;
}

double pairwise_sum(const std::vector<double>& terms) {
  std::vector<double> buf(terms);
  std::size_t n = buf.size();
  if (n == 0) return 0.0;
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) buf[i] = buf[2 * i] + buf[2 * i + 1];
    if (n % 2) buf[half] = buf[n - 1];
    n = half + n % 2;
  }
  return buf[0];
}

namespace {

[[noreturn]] void non_finite(const QuadratureNode& node) {
  std::ostringstream os;
  os.precision(17);
  os << "non-finite integrand at node (" << node.x.x() << ", " << node.x.y() << ", " << node.x.z() << ")";
  throw Error(ErrorKind::quadrature, os.str());
}

}  // namespace

double integrate(const SurfaceQuadrature& quad, const ScalarIntegrand& f) {
  std::vector<double> terms(quad.nodes.size());
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    const double v = f(quad.nodes[i]);
    if (!std::isfinite(v)) non_finite(quad.nodes[i]);
    terms[i] = quad.nodes[i].w * v;
  }
  return pairwise_sum(terms);
}

Vec3 integrate_vec(const SurfaceQuadrature& quad, const std::function<Vec3(const QuadratureNode&)>& f) {
  std::vector<double> tx(quad.nodes.size()), ty(tx.size()), tz(tx.size());
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
    const Vec3 v = f(quad.nodes[i]);
    if (!v.allFinite()) non_finite(quad.nodes[i]);
    tx[i] = quad.nodes[i].w * v.x();
    ty[i] = quad.nodes[i].w * v.y();
    tz[i] = quad.nodes[i].w * v.z();
  }
  return {pairwise_sum(tx), pairwise_sum(ty), pairwise_sum(tz)};
}

AdaptiveResult integrate_adaptive(const std::function<SurfaceQuadrature(int)>& rule, const ScalarIntegrand& f,
                                  double rtol, int max_level) {
  AdaptiveResult res;
  double prev = integrate(rule(0), f);
  for (int level = 1; level <= max_level; ++level) {
    const double cur = integrate(rule(level), f);
    const double scale = std::max(std::abs(cur), std::abs(prev));
    res.last_change = scale > 0.0 ? std::abs(cur - prev) / scale : 0.0;
    res.value = cur;
    res.level = level;
    if (res.last_change <= rtol) {
      res.converged = true;
      return res;
    }
    prev = cur;
  }
  return res;
}

double laplace_scaled_integral(const SurfaceQuadrature& quad, const Vec3& p, const MediumParams& medium, double tau,
                               double d, const SurfaceField& A) {
  const double kappa = medium.kappa(tau);
  return tau * integrate(quad, [&](const QuadratureNode& n) {
           const double r = (n.x - p).norm();
           return A(n.x, n.nu) * std::exp(-2.0 * kappa * (r - d)) / (r * r);
         });
}

double laplace_scaled_integral_naive(const SurfaceQuadrature& quad, const Vec3& p, const MediumParams& medium,
                                     double tau, double d, const SurfaceField& A) {
  const double kappa = medium.kappa(tau);
  const double raw = integrate(quad, [&](const QuadratureNode& n) {
    const double v = point_kernel(n.x, p, medium, tau).to_double();
    return A(n.x, n.nu) * v * v;
  });
  return tau * std::exp(2.0 * kappa * d) * raw;
}

}  // namespace enclosure
