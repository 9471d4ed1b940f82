// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "error.hpp"
#include "inverse.hpp"
#include "mesh.hpp"

using namespace enclosure;

namespace {

ProbeConfig fixture_probe() {
  ProbeConfig c;
  c.p = Vec3(0, 0, 2);
  c.eta = 0.1;
  c.a = Vec3(1, 0, 0);
  return c;
}

std::vector<IndicatorSample> synthetic(const TauGrid& g, const std::function<ScaledReal(double)>& f) {
  std::vector<IndicatorSample> out;
  for (double t : g.values) out.push_back({t, f(t), IndicatorKind::I_exact, "synthetic", "probe", ""});
  return out;
}

// Samples whose scaled value tau^2 e^{2 kappa dist} I / f~^2 equals y(tau).
std::vector<IndicatorSample> planted(const TauGrid& g, const ProbeConfig& c, double dist,
                                     const std::function<double(double)>& y) {
  return synthetic(g, [&](double t) {
    const double ft = pulse_laplace(c.profile, t);
    return ScaledReal::from_log(std::log(std::abs(y(t))) + 2 * std::log(ft) - 2 * std::log(t) -
                                    2 * c.medium.kappa(t) * dist,
                                y(t) > 0 ? 1 : -1);
  });
}

struct Plant {
  double H, Kg, lambda;
  std::array<double, 3> s;
};

}  // namespace

TEST_CASE("distance from a planted exponential") {
  const auto g = TauGrid::geometric(10.0, 1000.0, 1.25);
  const auto s = synthetic(g, [](double t) { return ScaledReal::from_log(-3.0 * t - 2.0 * std::log(t), 1); });
  const auto d = extract_distance(s, MediumParams());
  CHECK(d.d_hat == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(d.r2 > 1 - 1e-6);
  CHECK(d.window_begin == 0);
}

TEST_CASE("distance extraction preconditions") {
  const MediumParams m;
  auto short_grid = synthetic(TauGrid::geometric(10.0, 50.0, 1.25), [](double t) { return ScaledReal::from_log(-t, 1); });
  CHECK_THROWS_AS(extract_distance(short_grid, m), Error);
  auto few = synthetic(TauGrid::geometric(10.0, 200.0, 2.0), [](double t) { return ScaledReal::from_log(-t, 1); });
  CHECK_THROWS_AS(extract_distance(few, m), Error);
  auto zero = synthetic(TauGrid::geometric(10.0, 1000.0, 1.25), [](double) { return ScaledReal(0.0); });
  CHECK_THROWS_AS(extract_distance(zero, m), Error);
  // Oscillating data never passes the linearity gate.
  auto wiggle = synthetic(TauGrid::geometric(10.0, 1000.0, 1.25),
                          [](double t) { return ScaledReal::from_log(-t + 30.0 * std::sin(t), 1); });
  CHECK_THROWS_AS(extract_distance(wiggle, m), Error);
}

TEST_CASE("coefficient from a planted first-order tail") {
  const ProbeConfig c = fixture_probe();
  const auto g = TauGrid::geometric(100.0, 1000.0, 1.1);
  const auto s = planted(g, c, 0.9, [](double t) { return 3.0 + 5.0 / t; });
  CoefficientOptions o;
  o.normalize_source = false;
  o.order = 1;
  CHECK(extract_coefficient(s, 0.9, c, o).L == doctest::Approx(3.0).epsilon(1e-6));
  o.order = 2;
  CHECK(extract_coefficient(s, 0.9, c, o).L == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("coefficient errors: sign change, growth, decay") {
  const ProbeConfig c = fixture_probe();
  const auto g = TauGrid::geometric(100.0, 1000.0, 1.1);
  CoefficientOptions o;
  o.normalize_source = false;
  const auto flip = planted(g, c, 0.9, [](double t) { return t < 500 ? 1.0 : -1.0; });
  CHECK_THROWS_AS(extract_coefficient(flip, 0.9, c, o), Error);
  const auto s = planted(g, c, 0.9, [](double t) { return 3.0 + 5.0 / t; });
  CHECK_THROWS_AS(extract_coefficient(s, 0.9 * 1.001, c, o), Error);
  CHECK_THROWS_AS(extract_coefficient(s, 0.9 * 0.999, c, o), Error);
  CHECK_NOTHROW(extract_coefficient(s, 0.9 * (1 + 1e-6), c, o));
}

TEST_CASE("F from the coefficient") {
  const ProbeConfig c = fixture_probe();
  // L = (pi/2)(eta/d)^2 C |nu x a|^2 F
  const double F = 0.25;
  const double L = 0.5 * std::acos(-1.0) * 0.01 * limit_constant(c.medium, LimitConstant::standard) * 0.64 * F;
  CHECK(calF_from_coefficient(L, c, 1.0, 0.64) == doctest::Approx(F).epsilon(1e-14));
  CHECK_THROWS_AS(calF_from_coefficient(L, c, 1.0, 1e-13), Error);
  const MediumParams m(4.0, 1.0);
  CHECK(limit_constant(m, LimitConstant::standard) == doctest::Approx(2.0 * 2.0 / 256.0));
  CHECK(limit_constant(m, LimitConstant::alternative) == doctest::Approx(16.0 / 16.0));
}

TEST_CASE("curvature solve on planted surfaces") {
  const double r = 1.0 / 3.0;
  std::array<double, 3> s{1.0, 1.25, 2.0}, F;
  for (int j = 0; j < 3; ++j) F[j] = r / (s[j] + 1.0);
  auto cs = solve_curvatures(F, s);
  CHECK(cs.H == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(cs.Kg == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(cs.condition > 1.0);
  for (int j = 0; j < 3; ++j) F[j] = r / s[j];
  cs = solve_curvatures(F, s);
  CHECK(std::abs(cs.H) < 1e-10);
  CHECK(std::abs(cs.Kg) < 1e-10);

  CHECK_THROWS_AS(solve_curvatures({0.1, -0.1, 0.1}, s), Error);
  CHECK_THROWS_AS(solve_curvatures({0.1, 0.1, 0.1}, {1.0, 1.0, 2.0}), Error);
  CHECK_THROWS_AS(solve_curvatures({0.1, 0.0, 0.1}, s), Error);
}

TEST_CASE("admittance recovery") {
  const MediumParams m;
  std::array<double, 3> s{1.0, 1.5, 2.5};
  for (double lam : {2.0, 0.5}) {
    const double r = (lam - 1) / (lam + 1);
    std::array<double, 3> F;
    for (int j = 0; j < 3; ++j) F[j] = calF_forward(r, -1.0, 1.0, s[j]);
    const auto ar = recover_lambda(F, s, -1.0, 1.0, m);
    CHECK(ar.r == doctest::Approx(r).epsilon(1e-12));
    CHECK(ar.lambda == doctest::Approx(lam).epsilon(1e-10));
  }
  const auto zero = recover_lambda({0.0, 0.0, 0.0}, s, -1.0, 1.0, m);
  CHECK(zero.lambda == doctest::Approx(1.0));
  CHECK(has_diagnostic(zero.diagnostics, "vanishing_signal"));
  CHECK_THROWS_AS(recover_lambda({0.9, 0.9, 0.9}, s, -1.0, 1.0, m), Error);
}

TEST_CASE("round-trip exactness over random plants") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const MediumParams m(1.7, 0.6);
  int done = 0;
  while (done < 1000) {
    Plant p;
    p.H = -2.0 * u(rng);
    p.Kg = p.H * p.H * u(rng);
    p.lambda = m.lambda0() * (u(rng) < 0.5 ? 0.1 + 0.8 * u(rng) : 1.1 + 8.9 * u(rng));
    for (auto& x : p.s) x = 0.5 + 3.5 * u(rng);
    bool ok = std::abs(p.s[0] - p.s[1]) > 0.05 && std::abs(p.s[1] - p.s[2]) > 0.05 && std::abs(p.s[0] - p.s[2]) > 0.05;
    for (double x : p.s) ok = ok && hessian_det(p.H, p.Kg, x) > 0.0;
    if (!ok) continue;
    const double r = (p.lambda - m.lambda0()) / (p.lambda + m.lambda0());
    std::array<double, 3> F;
    for (int j = 0; j < 3; ++j) F[j] = calF_forward(r, p.H, p.Kg, p.s[j]);
    const auto cs = solve_curvatures(F, p.s);
    const auto ar = recover_lambda(F, p.s, cs.H, cs.Kg, m);
    CHECK(std::abs(cs.H - p.H) < 1e-9 * std::max(1.0, std::abs(p.H)));
    CHECK(std::abs(cs.Kg - p.Kg) < 1e-9 * std::max(1.0, p.Kg));
    CHECK(std::abs(ar.lambda - p.lambda) < 1e-9 * p.lambda);
    ++done;
  }
}

TEST_CASE("lambda is increasing in r") {
  const MediumParams m;
  double prev = 0.0;
  for (double r = -0.99; r < 0.99; r += 0.01) {
    std::array<double, 3> s{1.0, 1.5, 2.5}, F;
    for (int j = 0; j < 3; ++j) F[j] = calF_forward(r, -1.0, 1.0, s[j]);
    if (std::abs(r) < 1e-12) continue;
    const double lam = recover_lambda(F, s, -1.0, 1.0, m).lambda;
    CHECK(lam > prev);
    prev = lam;
  }
}

TEST_CASE("noise amplification of the curvature solve") {
  const std::array<double, 3> s{1.0, 1.25, 2.0};
  const double r = 1.0 / 3.0;
  std::array<double, 3> F0;
  for (int j = 0; j < 3; ++j) F0[j] = r / (s[j] + 1.0);

  // d(H, Kg) / d(log F_j) for this plant.
  const double jh[3] = {-84.0, 135.0, -51.0}, jk[3] = {-48.0, 54.0, -6.0};
  const double h = 1e-7;
  for (int j = 0; j < 3; ++j) {
    auto up = F0, dn = F0;
    up[j] *= 1 + h;
    dn[j] *= 1 - h;
    const auto a = solve_curvatures(up, s), b = solve_curvatures(dn, s);
    CHECK((a.H - b.H) / (2 * h) == doctest::Approx(jh[j]).epsilon(1e-5));
    CHECK((a.Kg - b.Kg) / (2 * h) == doctest::Approx(jk[j]).epsilon(1e-5));
  }

  std::mt19937_64 rng(5);
  const double sigma = 0.005;
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> dh, dk;
  double cond = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::array<double, 3> F;
    for (int j = 0; j < 3; ++j) F[j] = F0[j] * (1.0 + g(rng));
    const auto cs = solve_curvatures(F, s);
    dh.push_back(std::abs(cs.H + 1.0));
    dk.push_back(std::abs(cs.Kg - 1.0));
    cond = cs.condition;
  }
  std::nth_element(dh.begin(), dh.begin() + 50, dh.end());
  std::nth_element(dk.begin(), dk.begin() + 50, dk.end());
  const double norm_h = std::sqrt(84.0 * 84 + 135.0 * 135 + 51.0 * 51);
  const double norm_k = std::sqrt(48.0 * 48 + 54.0 * 54 + 6.0 * 6);
  MESSAGE("median |dH| = " << dh[50] << ", median |dK| = " << dk[50] << ", condition = " << cond);
  CHECK(cond > 1.0);
  CHECK(dh[50] == doctest::Approx(0.6745 * sigma * norm_h).epsilon(0.3));
  CHECK(dk[50] == doctest::Approx(0.6745 * sigma * norm_k).epsilon(0.3));
}

TEST_CASE("observation-time gate") {
  const MediumParams m;
  CHECK(observation_time_gate(1.5, 0.9, m).signal_free);
  CHECK(observation_time_gate(1.8, 0.9, m).signal_free);
  CHECK_FALSE(observation_time_gate(2.0, 0.9, m).signal_free);
  CHECK(observation_time_gate(2.0, 0.9, m).margin == doctest::Approx(0.2));
}

TEST_CASE("end-to-end reconstruction from model data") {
  const auto ob = Obstacle::sphere(Sphere{}, Admittance::constant(0.5));
  ReconstructionConfig rc;
  rc.source = DataSource::model;
  const auto rep = run_reconstruction(ob, rc);
  CHECK(rep.H_hat == doctest::Approx(-1.0).epsilon(0.02));
  CHECK(rep.Kg_hat == doctest::Approx(1.0).epsilon(0.02));
  CHECK(rep.lambda_hat == doctest::Approx(0.5).epsilon(0.02));
  CHECK(rep.r_hat < 0.0);
  CHECK(rep.d_hat == doctest::Approx(0.9).epsilon(1e-3));
}

TEST_CASE("reconstruction stage errors") {
  const auto ob = Obstacle::sphere(Sphere{}, Admittance::constant(2.0));
  ReconstructionConfig rc;
  rc.source = DataSource::model;
  rc.profile.T = 1.0;
  try {
    run_reconstruction(ob, rc);
    FAIL("expected a gate error");
  } catch (const Error& e) {
    CHECK(e.stage() == "gate");
    CHECK(std::string(e.what()).find("observation time") != std::string::npos);
  }
  rc.profile.T = 10.0;
  rc.dist_perturbation = 1e-3;
  try {
    run_reconstruction(ob, rc);
    FAIL("expected a divergence error");
  } catch (const Error& e) {
    CHECK(e.stage() == "coefficient");
    CHECK(e.kind() == ErrorKind::extraction);
  }
  rc.dist_perturbation = 0.0;
  rc.p0 = Vec3(0, 0, 0.5);
  CHECK_THROWS_AS(run_reconstruction(ob, rc), Error);
}

TEST_CASE("ellipsoid mesh: model-data distance") {
  const auto ob = Obstacle::from_mesh(ellipsoid_mesh(Vec3::Zero(), Vec3(1.5, 1.0, 0.8), 80), Admittance::constant(2.0));
  ProbeConfig c = fixture_probe();
  SeriesOptions so;
  so.source = DataSource::model;
  const auto I = select_kind(indicator_series(ob, c, TauGrid::geometric(5.0, 50.0, 1.25), so),
                             IndicatorKind::I_asymptotic_model);
  const auto d = extract_distance(I, c);
  const auto nd = nearest_points(ob, c.p);
  CHECK(d.d_hat == doctest::Approx(nd.d - c.eta).epsilon(0.01));
}
