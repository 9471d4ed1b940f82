// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "error.hpp"
#include "geometry.hpp"
#include "kernels.hpp"
#include "mesh.hpp"

using namespace enclosure;

TEST_CASE("sphere nearest point and curvature") {
  const auto ob = Obstacle::sphere(Sphere{Vec3(0, 0, 0), 2.0}, Admittance::constant(1.0));
  const auto nd = nearest_points(ob, Vec3(0, 3, 4));
  CHECK(nd.d == doctest::Approx(3.0));
  REQUIRE(nd.points.size() == 1);
  const auto& q = nd.points[0];
  CHECK((q.q - Vec3(0, 1.2, 1.6)).norm() < 1e-14);
  CHECK((q.nu - Vec3(0, 0.6, 0.8)).norm() < 1e-14);
  CHECK(q.H == doctest::Approx(-0.5));
  CHECK(q.Kg == doctest::Approx(0.25));
  CHECK(q.det == doctest::Approx(hessian_det(-0.5, 0.25, 1.0 / 3.0)));
  CHECK(q.k_q == doctest::Approx(1.0 / (1.0 / 3.0 + 0.5)));
  CHECK(std::abs(q.t1.dot(q.nu)) < 1e-15);
  CHECK(std::abs(q.t1.cross(q.t2).dot(q.nu) - 1.0) < 1e-14);
  CHECK_THROWS_AS(nearest_points(ob, Vec3(0, 0, 1)), Error);
}

TEST_CASE("Hessian determinant of the distance function") {
  CHECK(hessian_det(-1.0, 1.0, 1.0) == doctest::Approx(4.0));
  CHECK(hessian_det(0.0, 0.0, 2.0) == doctest::Approx(4.0));
  CHECK(hessian_det(0.5, 0.25, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("two spheres give two symmetric nearest points") {
  const auto ob = Obstacle::sphere_set({Sphere{Vec3(-1.5, 0, 0), 1.0}, Sphere{Vec3(1.5, 0, 0), 1.0}},
                                       Admittance::per_component({2.0, 3.0}));
  const auto nd = nearest_points(ob, Vec3(0, 0, 1.5));
  CHECK(nd.d == doctest::Approx(std::sqrt(4.5) - 1.0));
  REQUIRE(nd.points.size() == 2);
  CHECK(nd.points[0].component != nd.points[1].component);
  CHECK(std::abs(nd.points[0].q.x() + nd.points[1].q.x()) < 1e-14);
  CHECK(ob.lambda_at(nd.points[0].q, nd.points[0].component) != ob.lambda_at(nd.points[1].q, nd.points[1].component));
}

TEST_CASE("probe at a sphere center sees a continuum of nearest points") {
  const auto ob = Obstacle::sphere_set({Sphere{Vec3(0, 0, 0), 1.0}, Sphere{Vec3(10, 0, 0), 1.0}},
                                       Admittance::constant(2.0));
  CHECK_THROWS_AS(nearest_points(ob, Vec3(0, 0, 0)), Error);
}

TEST_CASE("Laplace predictor for a sphere with unit amplitude") {
  const auto ob = Obstacle::sphere(Sphere{}, Admittance::constant(1.0));
  const double pred = laplace_limit_predictor(ob, Vec3(2, 0, 0), MediumParams(), [](const Vec3&, const Vec3&) { return 1.0; });
  CHECK(pred == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-14));
}

TEST_CASE("admittance classes") {
  const MediumParams m;
  CHECK(Obstacle::sphere(Sphere{}, Admittance::constant(2.0)).classify(m) == AdmittanceClass::above_free_space);
  CHECK(Obstacle::sphere(Sphere{}, Admittance::constant(0.5)).classify(m) == AdmittanceClass::below_free_space);
  CHECK(Obstacle::sphere(Sphere{}, Admittance::constant(1.0)).classify(m) == AdmittanceClass::neither);
  const auto mixed = Obstacle::sphere_set({Sphere{Vec3(-3, 0, 0), 1.0}, Sphere{Vec3(3, 0, 0), 1.0}},
                                          Admittance::per_component({0.5, 2.0}));
  CHECK(mixed.classify(m) == AdmittanceClass::neither);
  const auto field = Obstacle::sphere(
      Sphere{}, Admittance::field([](const Vec3& x) { return 2.0 + 0.5 * x.z(); }, "2 + z/2"));
  CHECK(field.admittance_range().first == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(field.admittance_range().second == doctest::Approx(2.5).epsilon(1e-3));
  CHECK(field.classify(m) == AdmittanceClass::above_free_space);
  CHECK_THROWS_AS(Admittance::constant(-1.0), Error);
}

TEST_CASE("ellipsoid mesh: area, volume, closedness") {
  const auto mesh = ellipsoid_mesh(Vec3::Zero(), Vec3(1, 1, 1), 40);
  CHECK(mesh.area() == doctest::Approx(4.0 * std::numbers::pi).epsilon(2e-3));
  CHECK(mesh.signed_volume() == doctest::Approx(4.0 / 3.0 * std::numbers::pi).epsilon(3e-3));
  CHECK(winding_number(mesh, Vec3(0.1, 0.2, 0.0)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(winding_number(mesh, Vec3(3, 0, 0))) < 1e-9);
}

TEST_CASE("mesh curvature on a sphere") {
  const auto mesh = ellipsoid_mesh(Vec3::Zero(), Vec3(1, 1, 1), 40);
  double worst_h = 0.0, worst_k = 0.0;
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    worst_h = std::max(worst_h, std::abs(mesh.mean_curvature[i] + 1.0));
    worst_k = std::max(worst_k, std::abs(mesh.gauss_curvature[i] - 1.0));
    CHECK((mesh.normals[i] - mesh.vertices[i].normalized()).norm() < 1e-3);
  }
  CHECK(worst_h < 1e-2);
  CHECK(worst_k < 2e-2);
}

TEST_CASE("ellipsoid mesh nearest point at an axis tip") {
  const Vec3 ax(1.5, 1.0, 0.8);
  const auto ob = Obstacle::from_mesh(ellipsoid_mesh(Vec3::Zero(), ax, 80), Admittance::constant(2.0));
  const auto nd = nearest_points(ob, Vec3(0, 0, 2.0));
  CHECK(nd.d == doctest::Approx(1.2).epsilon(1e-3));
  REQUIRE(nd.points.size() == 1);
  const auto& q = nd.points[0];
  CHECK((q.q - Vec3(0, 0, 0.8)).norm() < 1e-3);
  // Principal curvatures c/a^2 and c/b^2 at the tip.
  const double k1 = 0.8 / 2.25, k2 = 0.8;
  CHECK(q.H == doctest::Approx(-(k1 + k2) / 2).epsilon(0.02));
  CHECK(q.Kg == doctest::Approx(k1 * k2).epsilon(0.03));
}

TEST_CASE("mesh text round trip and malformed input") {
  const auto mesh = ellipsoid_mesh(Vec3(1, 2, 3), Vec3(1, 2, 1), 6);
  std::stringstream ss;
  write_mesh(ss, mesh);
  const auto back = read_mesh(ss);
  CHECK(back.vertex_count() == mesh.vertex_count());
  CHECK(back.triangle_count() == mesh.triangle_count());
  CHECK(back.area() == doctest::Approx(mesh.area()).epsilon(1e-14));

  std::stringstream bad("vertices 3\n0 0 0\n1 0 0\n0 1 0\ntriangles 1\n0 1 7\n");
  CHECK_THROWS_AS(read_mesh(bad), Error);
  std::stringstream junk("# nothing\nvertices x\n");
  CHECK_THROWS_AS(read_mesh(junk), Error);
  CHECK_THROWS_AS(read_mesh_file("/nonexistent/mesh.txt"), Error);
}

TEST_CASE("closest point on a triangle") {
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  auto cp = closest_point_on_triangle(Vec3(0.2, 0.2, 1.0), a, b, c);
  CHECK((cp.point - Vec3(0.2, 0.2, 0)).norm() < 1e-15);
  CHECK(cp.distance == doctest::Approx(1.0));
  CHECK(cp.barycentric.sum() == doctest::Approx(1.0));
  cp = closest_point_on_triangle(Vec3(2, -1, 0), a, b, c);
  CHECK((cp.point - b).norm() < 1e-15);
}
