#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace edgestream {

inline constexpr double kShape = 1.0;
inline constexpr double kRate = 1e-4;
inline constexpr double kCouplingBound = 0.45;

struct HyperState {
  Eigen::VectorXd s;
  Eigen::VectorXd q;
  double beta = 1.0;
  double a = kShape;
  double b = kRate;

  Eigen::Index locations() const { return s.size(); }
  // Restricts every q_i to |q_i| <= 0.45 s_i so each prior block stays diagonally dominant.
  void clamp_coupling();
};

// AsPrinted and Stabilized store the printed update values directly as prior
// covariances. Reciprocal stores their reciprocals, which keeps the iteration
// away from the collapsed state where every location is flagged relevant.
enum class UpdateVariant { AsPrinted, Stabilized, Reciprocal };

// Temporal reads the q update within each location block; CrossBlock pairs
// block i with block i + 1.
enum class CouplingReading { Temporal, CrossBlock };

std::string to_string(UpdateVariant v);
UpdateVariant parse_variant(const std::string& s);

struct SolverOptions {
  int max_iters = 1000;
  double tol = 1e-4;
  std::optional<double> fixed_beta;
  UpdateVariant variant = UpdateVariant::Reciprocal;
  CouplingReading reading = CouplingReading::Temporal;
  double s_max = 1e10;
  bool zero_coupling = false;
};

struct SolverDivergence : std::runtime_error {
  int iteration;
  SolverDivergence(const std::string& what, int it) : std::runtime_error(what), iteration(it) {}
};

struct PosteriorMoments {
  Eigen::VectorXd mu;
  std::vector<Eigen::MatrixXd> lambda;

  double trace_lambda() const;
};

struct TraceEntry {
  int iteration = 0;
  double objective = 0;
  double change = 0;
  double beta = 0;
};

struct SolverResult {
  Eigen::VectorXd x;
  HyperState state;
  std::vector<TraceEntry> trace;
  int iterations = 0;
  bool converged = false;
};

struct Partials {
  Eigen::VectorXd s;
  Eigen::VectorXd q;
  double beta = 0;
};

// Symmetric tridiagonal J x J block with diagonal s and off-diagonal q.
Eigen::MatrixXd prior_block(double s, double q, int J);
std::vector<Eigen::MatrixXd> assemble_prior(HyperState state, int J);

PosteriorMoments posterior_moments(const Eigen::VectorXd& Y, const HyperState& state, int J);

// Mean of the k-th diagonal entries of block (i, j) of a J-blocked square matrix.
template <typename Derived>
double block_average(const Eigen::MatrixBase<Derived>& A, Eigen::Index i, Eigen::Index j, int J) {
  return A.block(i * J, j * J, J, J).diagonal().mean();
}

// Sum of the first superdiagonal of a block, divided by J.
template <typename Derived>
double lag_average(const Eigen::MatrixBase<Derived>& A) {
  const Eigen::Index J = A.rows();
  if (J < 2) return 0.0;
  return A.diagonal(1).sum() / static_cast<double>(J);
}

HyperState initial_state(const Eigen::VectorXd& Y, int J, const SolverOptions& opts);

double log_evidence(const Eigen::VectorXd& Y, const HyperState& state, int J);
double objective_L(const HyperState& state, const Eigen::VectorXd& Y, int J);
Partials partials_L(const HyperState& state, const Eigen::VectorXd& Y, int J,
                    CouplingReading reading = CouplingReading::Temporal);

// Brackets of the s and q updates for block i.
double s_bracket(const PosteriorMoments& m, const HyperState& state, Eigen::Index i, int J);
double q_bracket(const PosteriorMoments& m, const HyperState& state, Eigen::Index i, int J,
                 CouplingReading reading = CouplingReading::Temporal);

// The printed maps 2/D and 1/D with the variant's safeguard applied.
double printed_s(double bracket, double b, UpdateVariant variant, double s_max);
double printed_q(double bracket, double s_max);

Eigen::VectorXd update_s(const HyperState& state, const PosteriorMoments& m, int J, const SolverOptions& opts);
Eigen::VectorXd update_q(const HyperState& state, const PosteriorMoments& m, const Eigen::VectorXd& s_new, int J,
                         const SolverOptions& opts);
double update_beta(const HyperState& state, const PosteriorMoments& m, const Eigen::VectorXd& Y);

double relative_change(const HyperState& before, const HyperState& after);
void check_finite(const HyperState& state, int iteration);

SolverResult run_jhbl(const Eigen::VectorXd& Y, int J, const SolverOptions& opts = {});

}  // namespace edgestream
