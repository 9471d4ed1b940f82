// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace enclosure {

Admittance Admittance::constant(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::invalid_argument, "admittance: constant value must be positive and finite");
  }
  Admittance a;
  a.kind_ = Kind::constant;
  a.values_ = {value};
  a.description_ = "constant";
  return a;
}

Admittance Admittance::per_component(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::invalid_argument, "admittance: empty per-component list");
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::invalid_argument, "admittance: per-component values must be positive and finite");
    }
  }
  Admittance a;
  a.kind_ = Kind::per_component;
  a.values_ = std::move(values);
  a.description_ = "per-component";
  return a;
}

Admittance Admittance::field(Field fn, std::string description) {
  if (!fn) throw Error(ErrorKind::invalid_argument, "admittance: empty field function");
  Admittance a;
  a.kind_ = Kind::field;
  a.fn_ = std::move(fn);
  a.values_.clear();
  a.description_ = std::move(description);
  return a;
}

double Admittance::at(const Vec3& x, int component) const {
  switch (kind_) {
    case Kind::constant:
      return values_[0];
    case Kind::per_component:
      if (component < 0 || component >= static_cast<int>(values_.size())) {
        throw Error(ErrorKind::invalid_argument, "admittance: component index out of range");
      }
      return values_[component];
    case Kind::field:
      return fn_(x);
  }
  return values_[0];
}

std::optional<double> Admittance::constant_value() const {
  if (kind_ == Kind::constant) return values_[0];
  if (kind_ == Kind::per_component &&
      std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_[0]; })) {
    return values_[0];
  }
  return std::nullopt;
}

const char* to_string(AdmittanceClass c) {
  switch (c) {
    case AdmittanceClass::above_free_space:
      return "A.I";
    case AdmittanceClass::below_free_space:
      return "A.II";
    case AdmittanceClass::neither:
      return "neither";
  }
  return "neither";
}

Obstacle::Obstacle(std::variant<std::vector<Sphere>, std::shared_ptr<const TriMesh>> shape, Admittance lambda,
                   std::string id)
    : shape_(std::move(shape)), admittance_(std::move(lambda)), id_(std::move(id)) {}

Obstacle Obstacle::sphere(const Sphere& s, Admittance lambda, std::string id) {
  return sphere_set({s}, std::move(lambda), std::move(id));
}

Obstacle Obstacle::sphere_set(std::vector<Sphere> spheres, Admittance lambda, std::string id) {
  if (spheres.empty()) throw Error(ErrorKind::geometry, "obstacle: empty sphere set");
  for (const auto& s : spheres) {
    if (!(s.radius > 0.0) || !std::isfinite(s.radius) || !s.center.allFinite()) {
      throw Error(ErrorKind::geometry, "obstacle: sphere radius must be positive and finite");
    }
  }
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    for (std::size_t j = i + 1; j < spheres.size(); ++j) {
      if ((spheres[i].center - spheres[j].center).norm() <= spheres[i].radius + spheres[j].radius) {
        throw Error(ErrorKind::geometry, "obstacle: spheres must be disjoint");
      }
    }
  }
  return Obstacle(std::move(spheres), std::move(lambda), std::move(id));
}

Obstacle Obstacle::from_mesh(TriMesh mesh, Admittance lambda, std::string id) {
  return Obstacle(std::make_shared<const TriMesh>(std::move(mesh)), std::move(lambda), std::move(id));
}

std::pair<double, double> Obstacle::admittance_range() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto take = [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  if (is_sphere_set()) {
    // Fibonacci lattice per sphere.
    constexpr int samples = 2000;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    const auto& ss = spheres();
    for (std::size_t c = 0; c < ss.size(); ++c) {
      for (int i = 0; i < samples; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / samples;
        const double rho = std::sqrt(1.0 - z * z);
        const Vec3 u(rho * std::cos(golden * i), rho * std::sin(golden * i), z);
        take(admittance_.at(ss[c].center + ss[c].radius * u, static_cast<int>(c)));
      }
    }
  } else {
    for (const auto& v : mesh().vertices) take(admittance_.at(v, 0));
  }
  return {lo, hi};
}

AdmittanceClass Obstacle::classify(const MediumParams& medium) const {
  const auto [lo, hi] = admittance_range();
  if (!(lo > 0.0) || !std::isfinite(hi)) {
    throw Error(ErrorKind::geometry, "obstacle: admittance must be positive and finite on the surface");
  }
  if (lo > medium.lambda0()) return AdmittanceClass::above_free_space;
  if (hi < medium.lambda0()) return AdmittanceClass::below_free_space;
  return AdmittanceClass::neither;
}

bool Obstacle::contains(const Vec3& p) const {
  if (is_sphere_set()) {
    for (const auto& s : spheres()) {
      if ((p - s.center).norm() <= s.radius) return true;
    }
    return false;
  }
  return winding_number(mesh(), p) > 0.5;
}

double Obstacle::surface_area() const {
  if (!is_sphere_set()) return mesh().area();
  double a = 0.0;
  for (const auto& s : spheres()) a += 4.0 * std::numbers::pi * s.radius * s.radius;
  return a;
}

std::pair<Vec3, Vec3> tangent_frame(const Vec3& nu) {
  const Vec3 a = nu.cwiseAbs();
  Vec3 helper = Vec3::UnitX();
  if (a.y() <= a.x() && a.y() <= a.z()) helper = Vec3::UnitY();
  if (a.z() < a.x() && a.z() < a.y()) helper = Vec3::UnitZ();
  const Vec3 t1 = helper.cross(nu).normalized();
  return {t1, nu.cross(t1)};
}

double hessian_det(double H, double Kg, double s) { return s * s - 2.0 * H * s + Kg; }

namespace {

void finish_point(NearestPoint& np, double d) {
  np.H = 0.5 * np.shape_op.trace();
  np.Kg = np.shape_op.determinant();
  np.det = hessian_det(np.H, np.Kg, 1.0 / d);
  np.k_q = np.det > 0.0 ? 1.0 / std::sqrt(np.det) : std::numeric_limits<double>::infinity();
}

void check_hessians(NearestPointData& out) {
  for (const auto& np : out.points) {
    if (!(np.det > 0.0)) {
      out.diagnostics.push_back({"degenerate_hessian", "s^2 - 2Hs + K <= 0 at a nearest point"});
      return;
    }
  }
}

NearestPointData nearest_on_spheres(const std::vector<Sphere>& spheres, const Vec3& p, const NearestOptions& opts) {
  NearestPointData out;
  std::vector<double> dist(spheres.size());
  out.d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    const double r = (p - spheres[i].center).norm();
    if (r <= spheres[i].radius) {
      throw Error(ErrorKind::geometry, "probe point lies inside or on the obstacle");
    }
    dist[i] = r - spheres[i].radius;
    out.d = std::min(out.d, dist[i]);
  }
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-6 * out.d;
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    if (dist[i] > out.d + tol) continue;
    const auto& s = spheres[i];
    NearestPoint np;
    np.nu = (p - s.center).normalized();
    np.q = s.center + s.radius * np.nu;
    std::tie(np.t1, np.t2) = tangent_frame(np.nu);
    np.shape_op = -Eigen::Matrix2d::Identity() / s.radius;
    np.component = static_cast<int>(i);
    finish_point(np, (p - np.q).norm());
    out.points.push_back(np);
  }
  return out;
}

NearestPointData nearest_on_mesh(const TriMesh& mesh, const Vec3& p, const NearestOptions& opts) {
  if (winding_number(mesh, p) > 0.5) {
    throw Error(ErrorKind::geometry, "probe point lies inside the obstacle");
  }
  NearestPointData out;
  out.d = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles) {
    const auto cp = closest_point_on_triangle(p, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    out.d = std::min(out.d, cp.distance);
  }
  if (!(out.d > 0.0)) throw Error(ErrorKind::geometry, "probe point lies on the obstacle surface");
  const double tol = opts.tol > 0.0 ? opts.tol : 2.0 * mesh.max_edge;

  // Discrete local minima of the vertex distance, then exact refinement over
  // the surrounding triangles.
  const std::size_t nv = mesh.vertices.size();
  std::vector<double> vd(nv);
  for (std::size_t v = 0; v < nv; ++v) vd[v] = (mesh.vertices[v] - p).norm();

  struct Candidate {
    ClosestPoint cp;
    int tri;
  };
  std::vector<Candidate> found;
  for (std::size_t v = 0; v < nv; ++v) {
    if (vd[v] > out.d + tol) continue;
    bool is_min = true;
    for (int w : mesh.vertex_ring[v]) {
      if (vd[w] < vd[v] || (vd[w] == vd[v] && w < static_cast<int>(v))) {
        is_min = false;
        break;
      }
    }
    if (!is_min) continue;
    Candidate best{{}, -1};
    best.cp.distance = std::numeric_limits<double>::infinity();
    auto scan = [&](int vertex) {
      for (int t : mesh.vertex_faces[vertex]) {
        const auto& tri = mesh.triangles[t];
        const auto cp = closest_point_on_triangle(p, mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
        if (cp.distance < best.cp.distance) best = {cp, t};
      }
    };
    scan(static_cast<int>(v));
    for (int w : mesh.vertex_ring[v]) scan(w);
    if (best.tri < 0 || best.cp.distance > out.d + tol) continue;
    bool merged = false;
    for (auto& f : found) {
      if ((f.cp.point - best.cp.point).norm() < 2.0 * mesh.max_edge) {
        if (best.cp.distance < f.cp.distance) f = best;
        merged = true;
        break;
      }
    }
    if (!merged) found.push_back(best);
  }
  if (found.size() > opts.cap) {
    out.diagnostics.push_back({"degenerate_continuum",
                               "more than " + std::to_string(opts.cap) +
                                   " nearest points within tolerance; the nearest set is not finite"});
    found.resize(opts.cap);
  }

  for (const auto& f : found) {
    const auto& tri = mesh.triangles[f.tri];
    NearestPoint np;
    np.q = f.cp.point;
    np.nu = (p - np.q).normalized();
    std::tie(np.t1, np.t2) = tangent_frame(np.nu);
    Eigen::Matrix3d S = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 3; ++k) S += f.cp.barycentric(k) * mesh.shape_tensors[tri[k]];
    np.shape_op << np.t1.dot(S * np.t1), np.t1.dot(S * np.t2), np.t2.dot(S * np.t1), np.t2.dot(S * np.t2);
    np.shape_op = 0.5 * (np.shape_op + np.shape_op.transpose()).eval();
    finish_point(np, f.cp.distance);
    out.points.push_back(np);
  }
  return out;
}

}  // namespace

NearestPointData nearest_points(const Obstacle& obstacle, const Vec3& p, const NearestOptions& opts) {
  if (!p.allFinite()) throw Error(ErrorKind::invalid_argument, "nearest_points: non-finite probe point");
  NearestPointData out = obstacle.is_sphere_set() ? nearest_on_spheres(obstacle.spheres(), p, opts)
                                                  : nearest_on_mesh(obstacle.mesh(), p, opts);
  if (out.points.size() > opts.cap && !has_diagnostic(out.diagnostics, "degenerate_continuum")) {
    out.diagnostics.push_back({"degenerate_continuum", "nearest set exceeds the configured cap"});
    out.points.resize(opts.cap);
  }
  check_hessians(out);
  return out;
}

double laplace_limit_predictor(const NearestPointData& nearest, const MediumParams& medium, const SurfaceField& A) {
  if (has_diagnostic(nearest.diagnostics, "degenerate_continuum")) {
    throw Error(ErrorKind::hypothesis, "Laplace limit: nearest set is not finite");
  }
  if (has_diagnostic(nearest.diagnostics, "degenerate_hessian")) {
    throw Error(ErrorKind::hypothesis, "Laplace limit: degenerate distance Hessian at a nearest point");
  }
  double sum = 0.0;
  for (const auto& q : nearest.points) sum += q.k_q * A(q.q, q.nu);
  return std::numbers::pi / (medium.wavespeed_inv() * nearest.d * nearest.d) * sum;
}

double laplace_limit_predictor(const Obstacle& obstacle, const Vec3& p, const MediumParams& medium,
                               const SurfaceField& A) {
  return laplace_limit_predictor(nearest_points(obstacle, p), medium, A);
}

}  // namespace enclosure
