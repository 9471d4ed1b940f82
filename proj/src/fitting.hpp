// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Dense>

namespace enclosure {

struct LinearFit {
  Eigen::VectorXd coef;
  double r2 = 0.0;   // 1 - SS_res / SS_tot
  double rms = 0.0;  // residual root mean square
  std::vector<double> residuals;
};

/// Column-scaled least squares for A c ~ y.
LinearFit least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);

/// y(t) = c0 + c1/t + ... + c_order/t^order; coef(0) is the t -> inf limit.
LinearFit fit_inverse_powers(const std::vector<double>& t, const std::vector<double>& y, int order);

}  // namespace enclosure
