// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "error.hpp"
#include "kernels.hpp"

using namespace enclosure;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("scaled reals keep values far outside the double range") {
  const ScaledReal a = ScaledReal::from_log(-3000.0, 1);
  const ScaledReal b = ScaledReal::from_log(-2990.0, -1);
  CHECK(a.log_abs() == doctest::Approx(-3000.0).epsilon(1e-15));
  CHECK(ratio(a, b) == doctest::Approx(-std::exp(-10.0)).epsilon(1e-13));
  const ScaledReal s = a + b;
  CHECK(s.sign() == -1);
  CHECK(std::abs(s.log_abs() - (-2990.0 + std::log1p(-std::exp(-10.0)))) < 1e-12);
  CHECK((a * b).log_abs() == doctest::Approx(-5990.0));
  CHECK((a / a).to_double() == doctest::Approx(1.0));
  CHECK((a - a).is_zero());
  CHECK(ScaledReal(0.0).log_abs() == -std::numeric_limits<double>::infinity());
}

TEST_CASE("medium constants") {
  const MediumParams m(2.0, 0.5);
  CHECK(m.lambda0() == doctest::Approx(2.0));
  CHECK(m.wavespeed_inv() == doctest::Approx(1.0));
  CHECK(m.kappa(3.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(MediumParams(-1.0, 1.0), Error);
  CHECK_THROWS_AS(MediumParams(1.0, 0.0), Error);
}

TEST_CASE("phi against high-precision values") {
  CHECK(rel(phi(1.0), 0.36787944117144232160) < 1e-15);
  CHECK(rel(phi(1e-3), 3.3333336666666785714e-10) < 1e-13);
  CHECK(rel(phi(0.2), 0.0026773485827211816335) < 1e-14);
  CHECK(rel(log_phi(800.0), 805.99021376520632936) < 1e-15);
  CHECK(rel(log_phi(1.0), std::log(0.36787944117144232160)) < 1e-14);
}

TEST_CASE("phi is positive and increasing") {
  double prev = 0.0;
  for (double x = 1e-4; x < 50.0; x *= 1.3) {
    const double v = phi(x);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("pulse Laplace transforms") {
  PulseProfile lin{PulseKind::linear_ramp, 10.0};
  PulseProfile quad{PulseKind::quadratic_ramp, 10.0};
  CHECK(rel(pulse_laplace(lin, 0.01), 46.788401604444695193) < 1e-13);
  CHECK(rel(pulse_laplace(quad, 0.01), 309.30614052934330701) < 1e-13);
  CHECK(rel(pulse_laplace(lin, 5.0), 0.04) < 1e-14);
  CHECK(rel(pulse_laplace(quad, 5.0), 0.016) < 1e-14);
  PulseProfile lin2{PulseKind::linear_ramp, 2.0};
  PulseProfile quad2{PulseKind::quadratic_ramp, 2.0};
  CHECK(rel(pulse_laplace(lin2, 1e-4), 1.9997333533322667111) < 1e-13);
  CHECK(rel(pulse_laplace(quad2, 1e-4), 2.6662666986648889651) < 1e-13);
  CHECK(lin.gamma() == 2);
  CHECK(quad.gamma() == 3);
  // tau^gamma f~ stays bounded away from zero.
  for (double t : {10.0, 100.0, 1000.0}) {
    CHECK(std::pow(t, 2) * pulse_laplace(lin, t) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::pow(t, 3) * pulse_laplace(quad, t) == doctest::Approx(2.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS((PulseProfile{PulseKind::linear_ramp, 0.0}).validate(), Error);
}

TEST_CASE("source factor") {
  CHECK(rel(source_factor(MediumParams(2.0, 0.5), 0.1, 30.0).log_abs(), -4.4905966874927596382) < 1e-14);
  const MediumParams m;
  CHECK(rel(source_factor(m, 0.1, 3.0).to_double(), 0.0010090289768350585055) < 1e-13);
  CHECK(rel(source_factor_asymptotic(m, 0.1, 3.0).to_double(), 0.022497646792933385066) < 1e-13);
  for (double tau : {0.5, 3.0, 40.0, 400.0, 4e4}) {
    const double r = ratio(source_factor(m, 0.1, tau), source_factor_asymptotic(m, 0.1, tau));
    CHECK(rel(source_factor_ratio(m, 0.1, tau), r) < 1e-12);
  }
  CHECK(source_factor_ratio(m, 0.1, 1e6) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS(source_factor(m, 0.0, 1.0), Error);
}

TEST_CASE("tau grids") {
  const auto g = TauGrid::geometric(5.0, 50.0, 1.25);
  CHECK(g.values.front() == 5.0);
  CHECK(g.values.back() == 50.0);
  for (std::size_t i = 1; i < g.values.size(); ++i) CHECK(g.values[i] / g.values[i - 1] <= 1.25 + 1e-12);
  const auto l = TauGrid::linear(1.0, 2.0, 5);
  CHECK(l.values.size() == 5);
  CHECK(l.values[2] == doctest::Approx(1.5));
  TauGrid bad;
  bad.values = {2.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(TauGrid::geometric(5.0, 1.0), Error);
}

TEST_CASE("point kernel exponent bookkeeping") {
  const MediumParams m;
  const auto v = point_kernel(Vec3(50, 0, 0), Vec3::Zero(), m, 1000.0);
  CHECK(v.is_finite());
  CHECK(v.log_abs() == doctest::Approx(-50000.0 - std::log(50.0)));
  CHECK_THROWS_AS(point_kernel(Vec3::Zero(), Vec3::Zero(), m, 1.0), Error);
}
