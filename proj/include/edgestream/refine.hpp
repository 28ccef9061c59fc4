#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "edgestream/jhbl.hpp"

namespace edgestream {

// Hyper-parameter updates for the diagonal 2D solver. AsPrinted and
// Reciprocal mirror the 1D variants. Restored keeps the posterior variance
// terms that the diagonal approximation otherwise drops.
enum class Diag2DVariant { AsPrinted, Reciprocal, Restored };

std::string to_string(Diag2DVariant v);
Diag2DVariant parse_variant_2d(const std::string& s);

struct RefineOptions : SolverOptions {
  double vartheta = 0.05;
  bool refine = true;
  Diag2DVariant variant2d = Diag2DVariant::Restored;
};

// Unbiased variance across the J rows of a J x n matrix of frame estimates.
template <typename Derived>
Eigen::VectorXd q_from_covariance(const Eigen::MatrixBase<Derived>& frames) {
  const Eigen::Index J = frames.rows();
  if (J < 2) throw std::invalid_argument("temporal covariance needs at least two frames");
  const Eigen::RowVectorXd mean = frames.colwise().mean();
  return ((frames.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(J - 1)).transpose();
}

// Locations whose temporal variance reaches vartheta times the largest one.
std::vector<char> threshold_set(const Eigen::VectorXd& q, double vartheta);

// Single-frame estimate of the printed s update for frame y_j.
Eigen::VectorXd per_frame_u(const Eigen::VectorXd& y_j, const HyperState& state, UpdateVariant variant,
                            double s_max = 1e10);

struct Refinement {
  Eigen::VectorXd s;
  std::vector<char> active;
};

// On the threshold set, s_i becomes min_j |u_ji|; u is J x n.
Refinement refine_s(const Eigen::VectorXd& s, const Eigen::MatrixXd& u, const Eigen::VectorXd& q, double vartheta);

struct RefinedResult : SolverResult {
  std::vector<char> active;
  long block_solves = 0;
};

RefinedResult run_refined_jhbl(const Eigen::VectorXd& Y, int J, const RefineOptions& opts = {});
RefinedResult run_refined_jhbl_2d(const Eigen::VectorXd& Y, int J, const RefineOptions& opts = {});

}  // namespace edgestream
