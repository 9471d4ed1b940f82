// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bessel.hpp"
#include "error.hpp"
#include "indicator.hpp"
#include "inverse.hpp"
#include "quadrature.hpp"
#include "solver.hpp"

using namespace enclosure;

namespace {

const double pi = std::numbers::pi;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " FAILED(" << what << ")";
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Check&)>& body) {
  Check c;
  c.detail.precision(9);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail << " exception: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!c.ok) ++failures;
  std::printf("[%s] %d %s |%s | %.1f s\n", c.ok ? "PASS" : "FAIL", id, title, c.detail.str().c_str(), secs);
  std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

ProbeConfig sphere_probe(double L, const MediumParams& m = {}) {
  ProbeConfig c;
  c.p = Vec3(0, 0, L);
  c.eta = 0.1;
  c.a = Vec3(1, 0, 0);
  c.medium = m;
  return c;
}

Obstacle unit_sphere(double lambda) { return Obstacle::sphere(Sphere{}, Admittance::constant(lambda)); }

std::vector<IndicatorSample> exact_series(const Obstacle& ob, const ProbeConfig& c, const TauGrid& g) {
  return select_kind(indicator_series(ob, c, g, SeriesOptions{}), IndicatorKind::I_exact);
}

// Fourth-order central difference of g along axis k.
Vec3 d4(const std::function<Vec3(const Vec3&)>& g, const Vec3& x, int k, double h) {
  Vec3 e = Vec3::Zero();
  e(k) = h;
  return (-g(x + 2 * e) + 8.0 * g(x + e) - 8.0 * g(x - e) + g(x - 2 * e)) / (12.0 * h);
}

Vec3 fd_curl(const std::function<Vec3(const Vec3&)>& g, const Vec3& x, double h) {
  const Vec3 dx = d4(g, x, 0, h), dy = d4(g, x, 1, h), dz = d4(g, x, 2, h);
  return Vec3(dy(2) - dz(1), dz(0) - dx(2), dx(1) - dy(0));
}

void laplace_limit(Check& c) {
  const auto ob = unit_sphere(1.0);
  const Vec3 p(2, 0, 0);
  const MediumParams m;
  const auto nd = nearest_points(ob, p);
  const SurfaceField one = [](const Vec3&, const Vec3&) { return 1.0; };
  const double pred = laplace_limit_predictor(nd, m, one);
  c.expect(rel(pred, pi / 2) < 1e-14, "predictor");
  for (auto [tau, tol] : {std::pair{400.0, 0.01}, std::pair{1600.0, 0.0025}}) {
    const double v = laplace_scaled_integral(build_rule(ob, p, nd, m.kappa(tau), 1), p, m, tau, nd.d, one);
    c.detail << " tau=" << tau << " err=" << rel(v, pred);
    c.expect(rel(v, pred) < tol, "tolerance");
  }
}

void limit_identity(Check& c) {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const MediumParams m(0.2 + 4 * u(rng), 0.2 + 4 * u(rng));
    const double R = 0.2 + 3 * u(rng);
    const double lam = m.lambda0() * (u(rng) < 0.5 ? 0.05 + 0.9 * u(rng) : 1.05 + 20 * u(rng));
    ProbeConfig cfg;
    cfg.medium = m;
    cfg.eta = 0.02 + 0.3 * u(rng);
    const Vec3 dir = Vec3(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5).normalized();
    const Vec3 center(u(rng), u(rng), u(rng));
    cfg.p = center + (R + cfg.eta + 0.05 + 3 * u(rng)) * dir;
    cfg.a = Vec3(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5).normalized();
    const auto pl = predicted_limits(Obstacle::sphere(Sphere{center, R}, Admittance::constant(lam)), cfg);
    const double lhs = pl.get(LimitFormula::indicator_limit).value;
    const double rhs = pl.get(LimitFormula::J_limit).value + pl.get(LimitFormula::Jstar_limit).value;
    if (lhs != 0.0) worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
  }
  c.detail << " draws=1000 worst_rel=" << worst;
  c.expect(worst <= 1e-12, "identity");
}

void solver_limit(Check& c) {
  const double target = pi / 1200;
  for (double lam : {2.0, 0.5}) {
    const auto cfg = sphere_probe(2.0);
    const auto pl = predicted_limits(unit_sphere(lam), cfg);
    c.expect(rel(pl.get(LimitFormula::indicator_limit).value, lam > 1 ? target : -target) < 1e-13, "predictor");
    const auto ex = indicator_exact(unit_sphere(lam), cfg, 50.0);
    const double y = scaled_value_normalized(ex.I, 50.0, pl.dist, cfg);
    c.detail << " lambda=" << lam << " y(50)/limit=" << y / pl.get(LimitFormula::indicator_limit).value;
    c.expect(rel(y, lam > 1 ? target : -target) < 0.05, "normalized value at kappa R = 50");
    const auto far = indicator_exact(unit_sphere(lam), cfg, 400.0);
    const double raw = scaled_value(far.I, 400.0, pl.dist, cfg);
    c.detail << " raw(400)/limit=" << raw / pl.get(LimitFormula::indicator_limit).value;
    c.expect(rel(raw, lam > 1 ? target : -target) < 0.05, "raw value at kappa R = 400");
  }
  // Which constant describes a medium with epsilon != 1.
  const MediumParams m(4.0, 1.0);
  const auto cfg = sphere_probe(2.0, m);
  const auto ob = unit_sphere(2.0 * m.lambda0());
  const auto pl = predicted_limits(ob, cfg);
  const double tau = 50.0 / std::sqrt(m.mu() * m.epsilon());
  const double y = scaled_value_normalized(indicator_exact(ob, cfg, tau).I, tau, pl.dist, cfg);
  const double standard = pl.get(LimitFormula::indicator_limit).value;
  const double alternative =
      standard * limit_constant(m, LimitConstant::alternative) / limit_constant(m, LimitConstant::standard);
  c.detail << " eps=4: y/standard=" << y / standard << " y/alternative=" << y / alternative;
  c.expect(rel(y, standard) < 0.05, "standard constant");
  c.expect(rel(y, alternative) > 0.5, "alternative constant is distinguishable");
}

void energy_ratio(Check& c) {
  const auto cfg = sphere_probe(2.0);
  const auto grid = TauGrid::geometric(5.0, 50.0, 1.25);
  double prev = 1e300, last = 0.0;
  bool monotone = true;
  for (double tau : grid.values) {
    const auto ex = indicator_exact(unit_sphere(2.0), cfg, tau);
    const double gap = std::abs(ratio(ex.E, ex.J_star) - 1.0);
    monotone = monotone && gap < prev;
    prev = gap;
    last = ratio(ex.E, ex.J_star);
  }
  c.detail << " E/J*(" << grid.values.back() << ")=" << last << " monotone=" << monotone;
  c.expect(std::abs(last - 1.0) < 0.1, "top of grid");
  c.expect(monotone, "monotone approach");
}

void distance(Check& c) {
  const auto cfg = sphere_probe(2.1);
  const auto samples = exact_series(unit_sphere(2.0), cfg, TauGrid::geometric(20.0, 200.0, 1.25));
  const auto d = extract_distance(samples, cfg);
  c.detail << " d_hat=" << d.d_hat << " r2=" << d.r2;
  c.expect(rel(d.d_hat, 1.0) < 0.01, "distance");
  const auto shortT = observation_time_gate(1.5, 1.0, cfg.medium);
  const auto edge = observation_time_gate(2.0, 1.0, cfg.medium);
  const auto longT = observation_time_gate(10.0, 1.0, cfg.medium);
  c.detail << " gate(T=1.5,2,10)=" << shortT.signal_free << edge.signal_free << longT.signal_free;
  c.expect(shortT.signal_free && edge.signal_free && !longT.signal_free, "gate");
}

void reconstruction(Check& c) {
  for (DataSource src : {DataSource::exact, DataSource::model}) {
    const double tol = src == DataSource::exact ? 0.10 : 0.02;
    for (double lam : {2.0, 0.5}) {
      ReconstructionConfig rc;
      rc.source = src;
      const auto rep = run_reconstruction(unit_sphere(lam), rc);
      c.detail << " " << (src == DataSource::exact ? "exact" : "model") << " lambda=" << lam << ": H=" << rep.H_hat
               << " K=" << rep.Kg_hat << " lambda_hat=" << rep.lambda_hat << ";";
      c.expect(rel(rep.H_hat, -1.0) < tol && rel(rep.Kg_hat, 1.0) < tol && rel(rep.lambda_hat, lam) < tol,
               "reconstruction");
    }
  }
}

void ratios(Check& c) {
  const auto cfg = sphere_probe(2.0);
  const auto grid = TauGrid::geometric(20.0, 200.0, 1.25);
  const auto s2 = exact_series(unit_sphere(2.0), cfg, grid);
  const auto s1 = exact_series(unit_sphere(0.5), cfg, grid);
  const auto l2 = predicted_limits(unit_sphere(2.0), cfg).get(LimitFormula::indicator_limit);
  const auto l1 = predicted_limits(unit_sphere(0.5), cfg).get(LimitFormula::indicator_limit);
  const auto single = ratio_limit(s2, s1, l2, l1);
  c.detail << " single-q ratio=" << single.value;
  c.expect(std::abs(single.value + 1.0) < 0.05, "single nearest point");

  const std::vector<Sphere> spheres{Sphere{Vec3(-1.5, 0, 0), 1.0}, Sphere{Vec3(1.5, 0, 0), 1.0}};
  const auto ob2 = Obstacle::sphere_set(spheres, Admittance::per_component({2.0, 3.0}));
  const auto ob1 = Obstacle::sphere_set(spheres, Admittance::per_component({0.5, 0.25}));
  ProbeConfig tc;
  tc.p = Vec3(0, 0, 1.5);
  tc.eta = 0.1;
  tc.a = Vec3(0, 1, 0);
  SeriesOptions model;
  model.source = DataSource::model;
  const auto m2 = select_kind(indicator_series(ob2, tc, grid, model), IndicatorKind::I_asymptotic_model);
  const auto m1 = select_kind(indicator_series(ob1, tc, grid, model), IndicatorKind::I_asymptotic_model);
  const auto two = ratio_limit(m2, m1, predicted_limits(ob2, tc).get(LimitFormula::indicator_limit),
                               predicted_limits(ob1, tc).get(LimitFormula::indicator_limit));
  c.detail << " two-point ratio=" << two.value << " in [" << two.lower << ", " << two.upper << "]";
  c.expect(two.lower < two.upper, "distinct bounds");
  c.expect(two.value >= two.lower && two.value <= two.upper, "two nearest points");
}

void properties(Check& c) {
  // Round trip through the forward model.
  {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const MediumParams m(2.3, 0.8);
    double worst = 0.0;
    int done = 0;
    while (done < 1000) {
      const double H = -2.0 * u(rng), Kg = H * H * u(rng);
      const double lam = m.lambda0() * (u(rng) < 0.5 ? 0.1 + 0.8 * u(rng) : 1.1 + 8.9 * u(rng));
      std::array<double, 3> s{0.5 + 3.5 * u(rng), 0.5 + 3.5 * u(rng), 0.5 + 3.5 * u(rng)};
      bool ok = std::abs(s[0] - s[1]) > 0.05 && std::abs(s[1] - s[2]) > 0.05 && std::abs(s[0] - s[2]) > 0.05;
      for (double x : s) ok = ok && hessian_det(H, Kg, x) > 0.0;
      if (!ok) continue;
      const double r = (lam - m.lambda0()) / (lam + m.lambda0());
      std::array<double, 3> F;
      for (int j = 0; j < 3; ++j) F[j] = calF_forward(r, H, Kg, s[j]);
      const auto cs = solve_curvatures(F, s);
      const auto ar = recover_lambda(F, s, cs.H, cs.Kg, m);
      worst = std::max({worst, std::abs(cs.H - H) / std::max(1.0, std::abs(H)),
                        std::abs(cs.Kg - Kg) / std::max(1.0, Kg), std::abs(ar.lambda - lam) / lam});
      ++done;
    }
    c.detail << " round_trip=" << worst;
    c.expect(worst < 1e-9, "round trip");
  }
  // Incident field: PDE residual and divergence.
  {
    ProbeConfig cfg;
    cfg.p = Vec3(0.3, -0.2, 0.5);
    cfg.eta = 0.1;
    cfg.a = Vec3(1, 2, 2).normalized();
    cfg.medium = MediumParams(1.5, 0.8);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double pde = 0.0, div = 0.0;
    for (double tau : {1.0, 6.0, 20.0}) {
      const IncidentField f(cfg, tau);
      const double k = cfg.medium.kappa(tau);
      for (int i = 0; i < 20; ++i) {
        Vec3 d(u(rng), u(rng), u(rng));
        if (d.norm() < 0.3 || d.norm() > 1.0) {
          --i;
          continue;
        }
        const Vec3 x = cfg.p + 1.5 * d;
        const double ref = f.sample(x).exponent;
        auto E = [&](const Vec3& y) {
          const auto s = f.sample(y);
          return Vec3(s.E * std::exp(s.exponent - ref));
        };
        auto C = [&](const Vec3& y) {
          const auto s = f.sample(y);
          return Vec3(s.curlE * std::exp(s.exponent - ref));
        };
        const double h = 1e-3 / k;
        const Vec3 e = E(x);
        const Vec3 res = fd_curl(C, x, h) / (cfg.medium.mu() * cfg.medium.epsilon()) + tau * tau * e;
        pde = std::max(pde, res.norm() / (tau * tau * e.norm()));
        const double dv = d4(E, x, 0, h)(0) + d4(E, x, 1, h)(1) + d4(E, x, 2, h)(2);
        div = std::max(div, std::abs(dv) / (k * e.norm()));
      }
    }
    c.detail << " pde=" << pde << " div=" << div;
    c.expect(pde < 1e-5, "PDE residual");
    c.expect(div < 1e-6, "divergence");
  }
  // Solver: boundary condition, truncation, energy sign.
  {
    double bc = 0.0, delta = 0.0, e_min = 1e300;
    for (double lam : {2.0, 0.5, 10.0, 0.1}) {
      for (double tau : {2.0, 10.0, 50.0}) {
        const auto cfg = sphere_probe(2.0);
        const auto base = indicator_exact(unit_sphere(lam), cfg, tau);
        ExactOptions more;
        more.n_max = base.n_max + 10;
        const auto ext = indicator_exact(unit_sphere(lam), cfg, tau, more);
        bc = std::max(bc, base.bc_residual);
        delta = std::max(delta, std::abs(ratio(ext.E - base.E, base.E)));
        e_min = std::min(e_min, base.E.sign() * std::exp(base.E.log_abs() - base.J_star.log_abs()));
      }
    }
    c.detail << " bc=" << bc << " trunc=" << delta << " min E/|J*|=" << e_min;
    c.expect(bc < 1e-7, "boundary residual");
    c.expect(delta < 1e-8, "truncation");
    c.expect(e_min >= 0.0, "energy sign");
  }
  // Radial functions.
  {
    double worst = 0.0;
    for (double rho : {0.05, 0.7, 3.0, 25.0, 180.0, 900.0}) {
      const auto b = modified_spherical_bessel(400, rho);
      for (int n = 0; n <= 400; ++n) {
        const long double w = b.i_scaled[n] * b.dk_scaled[n] - b.di_scaled[n] * b.k_scaled[n];
        worst = std::max(worst, static_cast<double>(std::fabs(w * rho * rho + 1.0L)));
      }
    }
    c.detail << " wronskian=" << worst;
    c.expect(worst < 1e-12, "Wronskian");
  }
}

}  // namespace

int main() {
  criterion(1, "Laplace-method limit for a unit sphere", laplace_limit);
  criterion(2, "limit decomposition identity", limit_identity);
  criterion(3, "solver-backed indicator limit and constant adjudication", solver_limit);
  criterion(4, "energy term approaches J*", energy_ratio);
  criterion(5, "distance extraction and observation-time gate", distance);
  criterion(6, "curvature and admittance reconstruction", reconstruction);
  criterion(7, "indicator ratio limits", ratios);
  criterion(8, "property suites", properties);
  std::printf("%s: %d of 8 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
