// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "bessel.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace enclosure {

int bessel_start_order(int n_max, double rho) {
  return n_max + 40 + static_cast<int>(std::ceil(rho)) + static_cast<int>(std::sqrt(40.0 * (n_max + 1)));
}

ModifiedSphericalBessel modified_spherical_bessel(int n_max, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw Error(ErrorKind::invalid_argument, "modified_spherical_bessel: rho must be positive");
  }
  if (n_max < 0 || n_max > 2000) {
    throw Error(ErrorKind::invalid_argument,
                "modified_spherical_bessel: n_max must lie in [0, 2000], got " + std::to_string(n_max));
  }
  ModifiedSphericalBessel t;
  t.rho = rho;
  t.n_max = n_max;
  const int m = n_max + 1;  // one extra order for the derivatives
  const long double x = rho;

  // k: upward recurrence k_{n+1} = k_{n-1} + (2n+1)/x k_n, all terms positive.
  std::vector<long double> k(m + 1);
  k[0] = 1.0L / x;
  if (m >= 1) k[1] = (1.0L + 1.0L / x) / x;
  for (int n = 1; n < m; ++n) k[n + 1] = k[n - 1] + (2.0L * n + 1.0L) / x * k[n];

  // i: Miller's downward recurrence i_{n-1} = i_{n+1} + (2n+1)/x i_n,
  // normalised against e^{-x} i_0 = (1 - e^{-2x}) / (2x).
  const int start = bessel_start_order(m, rho);
  std::vector<long double> i(m + 1, 0.0L);
  long double upper = 0.0L;
  long double current = 1e-300L;
  for (int n = start; n > 0; --n) {
    const long double lower = upper + (2.0L * n + 1.0L) / x * current;
    upper = current;
    current = lower;
    if (n - 1 <= m) i[n - 1] = current;
    if (n <= m) i[n] = upper;
    if (std::fabs(current) > 1e300L) {
      upper *= 1e-300L;
      current *= 1e-300L;
      for (int j = n - 1; j <= m; ++j) {
        if (j >= 0) i[j] *= 1e-300L;
      }
    }
  }
  const long double i0 = -std::expm1(-2.0L * x) / (2.0L * x);
  const long double scale = i0 / i[0];
  for (auto& v : i) v *= scale;

  t.i_scaled.assign(i.begin(), i.begin() + m);
  t.k_scaled.assign(k.begin(), k.begin() + m);
  t.di_scaled.resize(m);
  t.dk_scaled.resize(m);
  for (int n = 0; n < m; ++n) {
    // i_n' = i_{n+1} + n/x i_n,  k_n' = -k_{n+1} + n/x k_n
    t.di_scaled[n] = i[n + 1] + n / x * i[n];
    t.dk_scaled[n] = -k[n + 1] + n / x * k[n];
  }
  t.i_scaled.resize(n_max + 1);
  t.k_scaled.resize(n_max + 1);
  t.di_scaled.resize(n_max + 1);
  t.dk_scaled.resize(n_max + 1);
  return t;
}

double ModifiedSphericalBessel::i(int n) const {
  return static_cast<double>(i_scaled[n] * std::exp(static_cast<long double>(rho)));
}
double ModifiedSphericalBessel::k(int n) const {
  return static_cast<double>(k_scaled[n] * std::exp(-static_cast<long double>(rho)));
}
double ModifiedSphericalBessel::di(int n) const {
  return static_cast<double>(di_scaled[n] * std::exp(static_cast<long double>(rho)));
}
double ModifiedSphericalBessel::dk(int n) const {
  return static_cast<double>(dk_scaled[n] * std::exp(-static_cast<long double>(rho)));
}

}  // namespace enclosure
