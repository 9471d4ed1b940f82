// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "kernels.hpp"
#include "mesh.hpp"
#include "scaled.hpp"

namespace enclosure {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// Surface admittance lambda on the obstacle boundary.
class Admittance {
 public:
  using Field = std::function<double(const Vec3&)>;

  static Admittance constant(double value);
  /// One constant per obstacle component (sphere sets).
  static Admittance per_component(std::vector<double> values);
  static Admittance field(Field fn, std::string description);

  double at(const Vec3& x, int component = 0) const;
  std::optional<double> constant_value() const;
  const std::string& description() const { return description_; }

 private:
  enum class Kind { constant, per_component, field };
  Kind kind_ = Kind::constant;
  std::vector<double> values_{1.0};
  Field fn_;
  std::string description_;
};

/// Position of the admittance relative to the free-space value lambda0.
enum class AdmittanceClass {
  above_free_space,  // inf lambda >= lambda0 + C
  below_free_space,  // C' <= lambda <= lambda0 - C
  neither,
};

const char* to_string(AdmittanceClass c);

class Obstacle {
 public:
  static Obstacle sphere(const Sphere& s, Admittance lambda, std::string id = "sphere");
  static Obstacle sphere_set(std::vector<Sphere> spheres, Admittance lambda, std::string id = "spheres");
  static Obstacle from_mesh(TriMesh mesh, Admittance lambda, std::string id = "mesh");

  bool is_sphere_set() const { return std::holds_alternative<std::vector<Sphere>>(shape_); }
  bool is_single_sphere() const { return is_sphere_set() && spheres().size() == 1; }
  const std::vector<Sphere>& spheres() const { return std::get<std::vector<Sphere>>(shape_); }
  const TriMesh& mesh() const { return *std::get<std::shared_ptr<const TriMesh>>(shape_); }

  const Admittance& admittance() const { return admittance_; }
  double lambda_at(const Vec3& x, int component = 0) const { return admittance_.at(x, component); }
  const std::string& id() const { return id_; }

  /// Range of lambda sampled over the surface.
  std::pair<double, double> admittance_range() const;
  AdmittanceClass classify(const MediumParams& medium) const;

  bool contains(const Vec3& p) const;
  double surface_area() const;

 private:
  Obstacle(std::variant<std::vector<Sphere>, std::shared_ptr<const TriMesh>> shape, Admittance lambda,
           std::string id);

  std::variant<std::vector<Sphere>, std::shared_ptr<const TriMesh>> shape_;
  Admittance admittance_;
  std::string id_;
};

struct NearestPoint {
  Vec3 q = Vec3::Zero();
  Vec3 nu = Vec3::UnitZ();   // outward normal at q, equals (p - q)/|p - q|
  Vec3 t1 = Vec3::UnitX();   // tangent frame
  Vec3 t2 = Vec3::UnitY();
  Eigen::Matrix2d shape_op = Eigen::Matrix2d::Zero();
  double H = 0.0;   // mean curvature
  double Kg = 0.0;  // Gauss curvature
  double det = 0.0; // s^2 - 2 H s + Kg
  double k_q = 0.0; // 1 / sqrt(det)
  int component = 0;
};

struct NearestPointData {
  double d = 0.0;
  std::vector<NearestPoint> points;
  Diagnostics diagnostics;
};

struct NearestOptions {
  double tol = -1.0;  // <= 0 selects 1e-6 d (analytic) or 2h (mesh)
  std::size_t cap = 16;
};

/// d(p) = min |y - p| over the surface and every local minimiser within tol of
/// it. Throws geometry errors for p inside the obstacle and for nearest sets
/// larger than the cap (continuum of nearest points).
NearestPointData nearest_points(const Obstacle& obstacle, const Vec3& p, const NearestOptions& opts = {});

/// det(S_B - S_D) = s^2 - 2 H s + Kg.
double hessian_det(double H, double Kg, double s);

using SurfaceField = std::function<double(const Vec3& x, const Vec3& nu)>;

/// Predicted limit of tau e^{2 tau sqrt(mu eps) d} int A v^2 dS:
///   pi / (sqrt(mu eps) d^2) sum_q k_q A(q).
double laplace_limit_predictor(const Obstacle& obstacle, const Vec3& p, const MediumParams& medium,
                               const SurfaceField& A);
double laplace_limit_predictor(const NearestPointData& nearest, const MediumParams& medium,
                               const SurfaceField& A);

/// Orthonormal tangent pair completing nu.
std::pair<Vec3, Vec3> tangent_frame(const Vec3& nu);

}  // namespace enclosure
