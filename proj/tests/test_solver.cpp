// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "error.hpp"
#include "solver.hpp"

using namespace enclosure;

namespace {

ProbeConfig fixture_probe(double L = 2.0) {
  ProbeConfig c;
  c.p = Vec3(0, 0, L);
  c.eta = 0.1;
  c.a = Vec3(1, 0, 0);
  return c;
}

ModalConfig fixture_modal(double lambda) {
  ModalConfig m;
  m.sphere = Sphere{};
  m.lambda = lambda;
  return m;
}

double rel(long double a, long double b) { return static_cast<double>(std::fabs(a - b) / std::fabs(b)); }

Vec3 value(const FieldSample& s, double ref) { return s.E * std::exp(s.exponent - ref); }

}  // namespace

TEST_CASE("reflection coefficients against independent single-mode solves") {
  const MediumParams m11;
  auto r = reflection_coefficients(1.0, 2.0, m11, 1.0, 4);
  CHECK(rel(r.te[1], 0.0037609298102650826244L) < 1e-12);
  CHECK(rel(r.tm[1], 0.057332358381693654053L) < 1e-12);
  r = reflection_coefficients(1.0, 0.5, m11, 5.0, 4);
  CHECK(rel(r.te[3], 0.021469595250041709723L) < 1e-12);
  CHECK(rel(r.tm[3], -0.011191084844606328336L) < 1e-12);
  const MediumParams m2(2.0, 0.5);  // lambda0 = 2, sqrt(mu eps) = 1
  r = reflection_coefficients(1.0, 3.0, m2, 2.0, 4);
  CHECK(rel(r.te[2], 0.0026643129508605966404L) < 1e-12);
  CHECK(rel(r.tm[2], 0.015181915829909258822L) < 1e-12);
}

TEST_CASE("perfect conductor and vanishing admittance limits") {
  const MediumParams m;
  const double rho = 3.0;
  const auto b = modified_spherical_bessel(20, rho);
  const auto pec = reflection_coefficients(b, std::numeric_limits<double>::infinity(), m);
  const auto big = reflection_coefficients(b, 1e12, m);
  const auto small = reflection_coefficients(b, 1e-12, m);
  for (int n = 1; n <= 20; ++n) {
    CHECK(rel(pec.te[n], -b.i_scaled[n] / b.k_scaled[n]) < 1e-14);
    CHECK(rel(pec.tm[n], -b.ri_scaled(n) / b.rk_scaled(n)) < 1e-14);
    CHECK(rel(big.te[n], pec.te[n]) < 1e-9);
    CHECK(rel(small.tm[n], -b.i_scaled[n] / b.k_scaled[n]) < 1e-9);
    CHECK(rel(small.te[n], -b.ri_scaled(n) / b.rk_scaled(n)) < 1e-9);
  }
}

TEST_CASE("incident series reproduces the closed form") {
  auto modal = fixture_modal(2.0);
  modal.n_max = 40;
  const ModalSolution sol(fixture_probe(), modal, 2.0);
  const IncidentField& f = sol.incident_closed_form();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 10; ++i) {
    const Vec3 x = Vec3(g(rng), g(rng), g(rng)).normalized();
    const auto s = sol.incident_at(x);
    const auto c = f.sample(x);
    CHECK((value(s, c.exponent) - c.E).norm() < 1e-8 * c.E.norm());
    CHECK(((s.H * std::exp(s.exponent - c.exponent)) - c.H).norm() < 1e-8 * c.H.norm());
  }
  CHECK(sol.expansion_check().max_error < 1e-8);
}

TEST_CASE("boundary residual, tail and expansion check over tau") {
  for (double lam : {2.0, 0.5}) {
    for (double tau : {2.0, 10.0, 40.0}) {
      const ModalSolution sol(fixture_probe(), fixture_modal(lam), tau);
      const auto quad = sphere_rule(Sphere{}, Vec3(0, 0, 1), tau, 1.0, {1});
      const auto refl = sol.surface_reflected_fields(quad);
      const auto res = sol.boundary_residual(quad, refl);
      CHECK(res.max_resolvable < 1e-7);
      CHECK(sol.tail() <= 1e-12);
      CHECK(sol.expansion_check().max_error < 1e-8);
      CHECK(sol.diagnostics().empty());
    }
  }
}

TEST_CASE("scattered field: mirror symmetry and radial decay") {
  const ModalSolution sol(fixture_probe(), fixture_modal(2.0), 5.0);
  const Vec3 x(0.4, 0.7, 0.9);
  const Vec3 xm(x.x(), -x.y(), x.z());
  const auto s = sol.scattered_at(x * 1.3 / x.norm());
  const auto t = sol.scattered_at(xm * 1.3 / xm.norm());
  const Vec3 e = s.E, f = t.E * std::exp(t.exponent - s.exponent);
  CHECK(std::abs(e.x() - f.x()) < 1e-12 * e.norm());
  CHECK(std::abs(e.y() + f.y()) < 1e-12 * e.norm());
  CHECK(std::abs(e.z() - f.z()) < 1e-12 * e.norm());
  // |E_s| decreases along the axis between R and 2R at least like k_1(kr)/k_1(kR).
  const double k = 5.0;
  const auto b1 = modified_spherical_bessel(1, k);
  const auto s0 = sol.scattered_at(Vec3(0, 0, 1.0));
  for (double r : {1.2, 1.5, 1.8}) {
    const auto sr = sol.scattered_at(Vec3(0, 0, r));
    const auto br = modified_spherical_bessel(1, k * r);
    const double ratio_field = value(sr, s0.exponent).norm() / s0.E.norm();
    const double ratio_k = static_cast<double>(br.k_scaled[1] / b1.k_scaled[1]) * std::exp(-k * (r - 1.0));
    CHECK(ratio_field <= ratio_k * (1.0 + 1e-9));
  }
}

TEST_CASE("free-space admittance suppresses the reflection at the nearest point") {
  double prev = 1e300;
  for (double tau : {5.0, 20.0, 80.0}) {
    const ModalSolution sol(fixture_probe(), fixture_modal(1.0), tau);
    const Vec3 q(0, 0, 1);
    const auto s = sol.scattered_at(q);
    const auto c = sol.incident_closed_form().sample(q);
    const double r = value(s, c.exponent).norm() / c.E.norm();
    CHECK(r < prev);
    prev = r;
  }
  CHECK(prev < 0.02);
}

TEST_CASE("solver preconditions") {
  ProbeConfig bad = fixture_probe();
  bad.a = Vec3(0, 0, 1);
  CHECK_THROWS_AS(ModalSolution(bad, fixture_modal(2.0), 1.0), Error);
  CHECK_THROWS_AS(ModalSolution(fixture_probe(1.05), fixture_modal(2.0), 1.0), Error);
  CHECK_THROWS_AS(ModalSolution(fixture_probe(), fixture_modal(-1.0), 1.0), Error);
  CHECK(default_n_max(50.0) == static_cast<int>(std::ceil(50.0 + 8.0 * std::cbrt(50.0) + 20.0)));
}
