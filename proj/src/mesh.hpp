// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scaled.hpp"

namespace enclosure {

/// Closed, outward-oriented triangle mesh with per-vertex normals and shape
/// operators.
///
/// Shape operators follow the distance-Hessian convention: for a height field
/// h(u, v) measured along the outward normal, S = Hess h at the vertex. A
/// sphere of radius R therefore has S = -I/R, H = -1/R, K = 1/R^2, and the
/// Hessian of y -> |y - p| at a nearest point is s I - S with s = 1/d.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> normals;                  // unit outward, per vertex
  std::vector<Eigen::Matrix3d> shape_tensors;  // S embedded in R^3, per vertex
  std::vector<double> mean_curvature;         // (k1 + k2) / 2, per vertex
  std::vector<double> gauss_curvature;        // k1 k2, per vertex
  std::vector<std::vector<int>> vertex_faces;  // incident triangles
  std::vector<std::vector<int>> vertex_ring;   // 1-ring neighbours
  double max_edge = 0.0;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
  double area() const;
  double signed_volume() const;
  Vec3 face_normal(std::size_t t) const;  // unit
};

/// Validates indices, orients the surface outward (positive signed volume),
/// and computes normals and curvature by quadric fits over 2-ring patches.
TriMesh build_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles);

/// Cube-sphere triangulation of an ellipsoid; cells per cube edge = n (even n
/// puts a vertex at each axis tip).
TriMesh ellipsoid_mesh(const Vec3& center, const Vec3& semi_axes, int n);

/// Plain-text indexed format:
///   vertices <N>
///   x y z           (N lines)
///   triangles <M>
///   i j k           (M lines, 0-based)
/// Lines starting with '#' are comments.
TriMesh read_mesh(std::istream& in);
TriMesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const TriMesh& mesh);

struct ClosestPoint {
  Vec3 point;
  Eigen::Vector3d barycentric;  // weights of the triangle's three vertices
  double distance = 0.0;
};

ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Generalised winding number of the closed mesh around p (1 inside, 0 outside).
double winding_number(const TriMesh& mesh, const Vec3& p);

}  // namespace enclosure
