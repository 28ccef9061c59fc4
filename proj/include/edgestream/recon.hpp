#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "edgestream/spectral.hpp"

namespace edgestream {

inline constexpr double kWeightFloor = 1e-4;

// w_i = 1/(|x_i| + eps), rescaled so that the largest weight is 1.
template <typename Derived>
Eigen::MatrixXd weights_from_edges(const Eigen::MatrixBase<Derived>& x, double eps = kWeightFloor) {
  Eigen::MatrixXd w = (x.array().abs() + eps).inverse().matrix();
  return w / w.maxCoeff();
}

inline double soft_threshold(double x, double t) { return std::copysign(std::max(std::abs(x) - t, 0.0), x); }

template <typename DerivedX, typename DerivedT>
Eigen::ArrayXXd soft_threshold(const Eigen::ArrayBase<DerivedX>& x, const Eigen::ArrayBase<DerivedT>& t) {
  return x.sign() * (x.abs() - t).cwiseMax(0.0);
}

// Periodic forward differences along x (columns) and y (rows).
struct Differences {
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;
};

Differences diff_apply(const Eigen::MatrixXd& f);
Eigen::MatrixXd diff_adjoint(const Differences& d);

struct AdmmOptions {
  double rho = 1.0;
  int max_iters = 300;
  double tol_primal = 1e-6;
  double tol_dual = 1e-6;
};

struct AdmmResult {
  Eigen::MatrixXd f;
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0;
  double dual_residual = 0;
  std::vector<double> objective;
};

// Unitary-DFT data of a measurement in FFT order and the matching 0/1 mask.
Eigen::MatrixXcd unitary_data(const SpectralMeasurement& g);
Eigen::MatrixXd fft_order_mask(const SpectralMeasurement& g);

// min 1/2 |M U f - g|^2 + sum W (|D_x f| + |D_y f|) with U the unitary DFT.
AdmmResult admm_weighted_l1(const SpectralMeasurement& g, const Eigen::MatrixXd& W, const AdmmOptions& opts = {});
AdmmResult cs_l1(const SpectralMeasurement& g, double lambda, const AdmmOptions& opts = {});
double default_cs_lambda(const SpectralMeasurement& g);

double relative_error(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth);

}  // namespace edgestream
