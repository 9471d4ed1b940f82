// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

namespace enclosure {

/// Modified spherical Bessel functions i_n, k_n for n = 0..n_max at one
/// argument rho, stored with the exponential growth/decay divided out:
///
///   i_n(rho) = i_scaled[n] * e^{+rho},   k_n(rho) = k_scaled[n] * e^{-rho}.
///
/// Normalisation: i_0(rho) = sinh(rho)/rho and k_0(rho) = e^{-rho}/rho, so that
/// i_n k_n' - i_n' k_n = -1/rho^2 for every n and the decaying kernel expands as
///   e^{-k|x-y|}/|x-y| = k sum_n (2n+1) i_n(k r_<) k_n(k r_>) P_n(cos g).
///
/// Long double storage keeps the power-law factors (2n-1)!!/rho^n inside the
/// representable range for n up to a few thousand.
struct ModifiedSphericalBessel {
  double rho = 0.0;
  int n_max = 0;
  std::vector<long double> i_scaled;   // e^{-rho} i_n
  std::vector<long double> k_scaled;   // e^{+rho} k_n
  std::vector<long double> di_scaled;  // e^{-rho} i_n'
  std::vector<long double> dk_scaled;  // e^{+rho} k_n'

  /// e^{-rho} [rho i_n]'/rho
  long double ri_scaled(int n) const { return di_scaled[n] + i_scaled[n] / rho; }
  /// e^{+rho} [rho k_n]'/rho
  long double rk_scaled(int n) const { return dk_scaled[n] + k_scaled[n] / rho; }

  /// Unscaled values; only meaningful while e^{rho} fits in a double.
  double i(int n) const;
  double k(int n) const;
  double di(int n) const;
  double dk(int n) const;
};

/// Throws invalid_argument for rho <= 0 or n_max outside [0, 2000].
ModifiedSphericalBessel modified_spherical_bessel(int n_max, double rho);

/// Downward-recurrence start order used for i_n.
int bessel_start_order(int n_max, double rho);

}  // namespace enclosure
