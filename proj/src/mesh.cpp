// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include <Eigen/Dense>

#include "error.hpp"

namespace enclosure {

double TriMesh::area() const {
  double total = 0.0;
  for (const auto& t : triangles) {
    total += 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
  }
  return total;
}

double TriMesh::signed_volume() const {
  double total = 0.0;
  for (const auto& t : triangles) {
    total += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]])) / 6.0;
  }
  return total;
}

Vec3 TriMesh::face_normal(std::size_t t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]).normalized();
}

namespace {

Vec3 helper_axis(const Vec3& n) {
  const Vec3 a = n.cwiseAbs();
  if (a.x() <= a.y() && a.x() <= a.z()) return Vec3::UnitX();
  if (a.y() <= a.z()) return Vec3::UnitY();
  return Vec3::UnitZ();
}

struct QuadricFit {
  bool ok = false;
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
};

// h(u, v) = a u^2 + b u v + c v^2 + d u + e v, least squares through the origin.
QuadricFit fit_quadric(const Vec3& origin, const Vec3& n, const std::vector<Vec3>& pts, Vec3& t1, Vec3& t2) {
  t1 = helper_axis(n).cross(n).normalized();
  t2 = n.cross(t1);
  QuadricFit fit;
  if (pts.size() < 5) return fit;
  Eigen::MatrixXd A(pts.size(), 5);
  Eigen::VectorXd h(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 r = pts[i] - origin;
    const double u = r.dot(t1);
    const double v = r.dot(t2);
    A.row(i) << u * u, u * v, v * v, u, v;
    h(i) = r.dot(n);
  }
  // Column scaling keeps the quadratic and linear blocks comparable.
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (int j = 0; j < 5; ++j) {
    if (scale(j) == 0.0) return fit;
    A.col(j) /= scale(j);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < 5) return fit;
  Eigen::VectorXd c = qr.solve(h);
  c = c.cwiseQuotient(scale);
  fit.ok = true;
  fit.hessian << 2.0 * c(0), c(1), c(1), 2.0 * c(2);
  fit.gradient << c(3), c(4);
  return fit;
}

void compute_normals_and_curvature(TriMesh& mesh) {
  const std::size_t nv = mesh.vertices.size();
  mesh.normals.assign(nv, Vec3::Zero());
  std::vector<std::set<int>> ring(nv);
  mesh.max_edge = 0.0;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int i = t[k];
      const int j = t[(k + 1) % 3];
      const int l = t[(k + 2) % 3];
      const Vec3 e1 = mesh.vertices[j] - mesh.vertices[i];
      const Vec3 e2 = mesh.vertices[l] - mesh.vertices[i];
      const double angle = std::atan2(e1.cross(e2).norm(), e1.dot(e2));
      mesh.normals[i] += angle * e1.cross(e2).normalized();
      ring[i].insert(j);
      ring[i].insert(l);
      mesh.max_edge = std::max(mesh.max_edge, e1.norm());
    }
  }
  mesh.vertex_faces.assign(nv, {});
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) mesh.vertex_faces[mesh.triangles[t][k]].push_back(static_cast<int>(t));
  }
  mesh.vertex_ring.assign(nv, {});
  for (std::size_t v = 0; v < nv; ++v) mesh.vertex_ring[v].assign(ring[v].begin(), ring[v].end());
  for (auto& n : mesh.normals) {
    if (n.norm() == 0.0) throw Error(ErrorKind::geometry, "mesh: isolated or degenerate vertex");
    n.normalize();
  }

  mesh.shape_tensors.assign(nv, Eigen::Matrix3d::Zero());
  mesh.mean_curvature.assign(nv, 0.0);
  mesh.gauss_curvature.assign(nv, 0.0);
  std::vector<Vec3> pts;
  for (std::size_t v = 0; v < nv; ++v) {
    std::set<int> two_ring;
    for (int w : ring[v]) {
      two_ring.insert(w);
      for (int x : ring[w]) two_ring.insert(x);
    }
    two_ring.erase(static_cast<int>(v));
    pts.clear();
    for (int w : two_ring) pts.push_back(mesh.vertices[w]);

    Vec3 n = mesh.normals[v];
    Vec3 t1, t2;
    QuadricFit fit;
    for (int pass = 0; pass < 2; ++pass) {
      fit = fit_quadric(mesh.vertices[v], n, pts, t1, t2);
      if (!fit.ok) break;
      const Vec3 tilted = n - fit.gradient(0) * t1 - fit.gradient(1) * t2;
      n = tilted.normalized();
    }
    if (!fit.ok) continue;
    fit = fit_quadric(mesh.vertices[v], n, pts, t1, t2);
    if (!fit.ok) continue;
    mesh.normals[v] = n;
    Eigen::Matrix<double, 3, 2> frame;
    frame.col(0) = t1;
    frame.col(1) = t2;
    mesh.shape_tensors[v] = frame * fit.hessian * frame.transpose();
    mesh.mean_curvature[v] = 0.5 * fit.hessian.trace();
    mesh.gauss_curvature[v] = fit.hessian.determinant();
  }
}

}  // namespace

TriMesh build_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles) {
  if (vertices.size() < 4 || triangles.size() < 4) {
    throw Error(ErrorKind::geometry, "mesh: a closed surface needs at least 4 vertices and 4 triangles");
  }
  const int nv = static_cast<int>(vertices.size());
  for (const auto& v : vertices) {
    if (!v.allFinite()) throw Error(ErrorKind::geometry, "mesh: non-finite vertex coordinate");
  }
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || t[k] >= nv) throw Error(ErrorKind::geometry, "mesh: triangle index out of range");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw Error(ErrorKind::geometry, "mesh: triangle with repeated vertex");
    }
  }
  TriMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double a = (mesh.vertices[tri[1]] - mesh.vertices[tri[0]])
                         .cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]])
                         .norm();
    if (!(a > 0.0)) throw Error(ErrorKind::geometry, "mesh: zero-area triangle " + std::to_string(t));
  }
  const double vol = mesh.signed_volume();
  if (vol == 0.0) throw Error(ErrorKind::geometry, "mesh: zero enclosed volume");
  if (vol < 0.0) {
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
  }
  compute_normals_and_curvature(mesh);
  return mesh;
}

TriMesh ellipsoid_mesh(const Vec3& center, const Vec3& semi_axes, int n) {
  if (n < 2) throw Error(ErrorKind::invalid_argument, "ellipsoid mesh: need at least 2 cells per edge");
  if (!(semi_axes.minCoeff() > 0.0)) throw Error(ErrorKind::invalid_argument, "ellipsoid mesh: semi-axes must be positive");

  std::vector<Vec3> unit;
  std::map<std::tuple<long long, long long, long long>, int> index;
  auto vertex_id = [&](const Vec3& x) {
    const auto key = std::make_tuple(std::llround(x.x() * 1e9), std::llround(x.y() * 1e9), std::llround(x.z() * 1e9));
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(unit.size());
    unit.push_back(x);
    index.emplace(key, id);
    return id;
  };

  std::vector<std::array<int, 3>> tris;
  std::vector<int> grid((n + 1) * (n + 1));
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign : {-1, 1}) {
      const int ua = (axis + 1) % 3;
      const int va = (axis + 2) % 3;
      for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
          Vec3 x = Vec3::Zero();
          x(axis) = sign;
          x(ua) = std::tan(0.25 * std::numbers::pi * (-1.0 + 2.0 * i / n));
          x(va) = std::tan(0.25 * std::numbers::pi * (-1.0 + 2.0 * j / n));
          // Snap the seams so neighbouring faces weld exactly.
          if (i == 0 || i == n) x(ua) = (i == 0) ? -1.0 : 1.0;
          if (j == 0 || j == n) x(va) = (j == 0) ? -1.0 : 1.0;
          grid[i * (n + 1) + j] = vertex_id(x.normalized());
        }
      }
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const int a = grid[i * (n + 1) + j];
          const int b = grid[(i + 1) * (n + 1) + j];
          const int c = grid[(i + 1) * (n + 1) + j + 1];
          const int d = grid[i * (n + 1) + j + 1];
          if ((i + j) % 2 == 0) {
            tris.push_back({a, b, c});
            tris.push_back({a, c, d});
          } else {
            tris.push_back({a, b, d});
            tris.push_back({b, c, d});
          }
        }
      }
    }
  }
  for (auto& t : tris) {
    const Vec3 nrm = (unit[t[1]] - unit[t[0]]).cross(unit[t[2]] - unit[t[0]]);
    if (nrm.dot(unit[t[0]] + unit[t[1]] + unit[t[2]]) < 0.0) std::swap(t[1], t[2]);
  }
  std::vector<Vec3> verts;
  verts.reserve(unit.size());
  for (const auto& u : unit) verts.push_back(center + semi_axes.cwiseProduct(u));
  return build_mesh(std::move(verts), std::move(tris));
}

TriMesh read_mesh(std::istream& in) {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> tris;
  std::string line;
  enum { none, v, t } section = none;
  long expected = 0;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::config, "mesh line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    if (expected == 0) {
      std::string key;
      ss >> key >> expected;
      if (ss.fail() || expected <= 0) fail("expected 'vertices <N>' or 'triangles <M>'");
      if (key == "vertices") {
        section = v;
      } else if (key == "triangles") {
        section = t;
      } else {
        fail("unknown section '" + key + "'");
      }
      continue;
    }
    if (section == v) {
      double x, y, z;
      ss >> x >> y >> z;
      if (ss.fail()) fail("bad vertex");
      verts.emplace_back(x, y, z);
    } else {
      std::array<int, 3> tri{};
      ss >> tri[0] >> tri[1] >> tri[2];
      if (ss.fail()) fail("bad triangle");
      tris.push_back(tri);
    }
    --expected;
  }
  if (expected != 0) fail("truncated section");
  return build_mesh(std::move(verts), std::move(tris));
}

TriMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open mesh file " + path);
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const TriMesh& mesh) {
  out << std::setprecision(17);
  out << "vertices " << mesh.vertices.size() << '\n';
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  out << "triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

// Region tests after Ericson, Real-Time Collision Detection, 5.1.5.
ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  auto make = [&](double wa, double wb, double wc) {
    ClosestPoint cp;
    cp.barycentric = Eigen::Vector3d(wa, wb, wc);
    cp.point = wa * a + wb * b + wc * c;
    cp.distance = (p - cp.point).norm();
    return cp;
  };
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return make(1, 0, 0);

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return make(0, 1, 0);

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double w = d1 / (d1 - d3);
    return make(1 - w, w, 0);
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return make(0, 0, 1);

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return make(1 - w, 0, w);
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return make(0, 1 - w, w);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return make(1 - v - w, v, w);
}

double winding_number(const TriMesh& mesh, const Vec3& p) {
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3 a = mesh.vertices[t[0]] - p;
    const Vec3 b = mesh.vertices[t[1]] - p;
    const Vec3 c = mesh.vertices[t[2]] - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * std::numbers::pi);
}

}  // namespace enclosure
