// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "fitting.hpp"

#include <cmath>

#include "error.hpp"

namespace enclosure {

LinearFit least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  if (A.rows() < A.cols() || A.rows() != y.size()) {
    throw Error(ErrorKind::extraction, "least squares: need at least as many samples as unknowns");
  }
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (scale(j) == 0.0) scale(j) = 1.0;
  }
  const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(As);
  if (qr.rank() < A.cols()) throw Error(ErrorKind::extraction, "least squares: rank-deficient design");
  LinearFit fit;
  fit.coef = qr.solve(y).cwiseQuotient(scale);
  const Eigen::VectorXd res = y - A * fit.coef;
  fit.residuals.assign(res.data(), res.data() + res.size());
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  const double ss_res = res.squaredNorm();
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.rms = std::sqrt(ss_res / static_cast<double>(y.size()));
  return fit;
}

LinearFit fit_inverse_powers(const std::vector<double>& t, const std::vector<double>& y, int order) {
  if (order < 0 || t.size() != y.size()) throw Error(ErrorKind::invalid_argument, "inverse power fit: bad input");
  const Eigen::Index n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd A(n, order + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= order; ++k) {
      A(i, k) = p;
      p /= t[i];
    }
    b(i) = y[i];
  }
  return least_squares(A, b);
}

}  // namespace enclosure
