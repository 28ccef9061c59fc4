#include "edgestream/refine.hpp"

#include <algorithm>
#include <cmath>

#include "edgestream/spectral.hpp"

namespace edgestream {

std::string to_string(Diag2DVariant v) {
  switch (v) {
    case Diag2DVariant::AsPrinted: return "as-printed";
    case Diag2DVariant::Reciprocal: return "reciprocal";
    case Diag2DVariant::Restored: return "restored";
  }
  return "restored";
}

Diag2DVariant parse_variant_2d(const std::string& s) {
  if (s == "as-printed") return Diag2DVariant::AsPrinted;
  if (s == "reciprocal") return Diag2DVariant::Reciprocal;
  if (s == "restored") return Diag2DVariant::Restored;
  throw std::invalid_argument("unknown 2D update variant: " + s);
}

std::vector<char> threshold_set(const Eigen::VectorXd& q, double vartheta) {
  if (vartheta < 0 || vartheta > 1) throw std::invalid_argument("vartheta must lie in [0, 1]");
  const double cut = vartheta * q.maxCoeff();
  std::vector<char> in(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) in[i] = q[i] >= cut;
  return in;
}

Eigen::VectorXd per_frame_u(const Eigen::VectorXd& y_j, const HyperState& state, UpdateVariant variant,
                            double s_max) {
  const UpdateVariant guard = variant == UpdateVariant::Reciprocal ? UpdateVariant::Stabilized : variant;
  Eigen::VectorXd u(y_j.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double s = state.s[i];
    const double lam = s / (1.0 + state.beta * s);
    const double mu = state.beta * lam * y_j[i];
    u[i] = printed_s(mu * mu + lam - s + 2.0 * state.b, state.b, guard, s_max);
  }
  return u;
}

Refinement refine_s(const Eigen::VectorXd& s, const Eigen::MatrixXd& u, const Eigen::VectorXd& q, double vartheta) {
  if (u.cols() != s.size() || q.size() != s.size()) throw std::invalid_argument("refinement inputs differ in length");
  Refinement r{s, threshold_set(q, vartheta)};
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (r.active[i]) r.s[i] = u.col(i).cwiseAbs().minCoeff();
  return r;
}

RefinedResult run_refined_jhbl(const Eigen::VectorXd& Y, int J, const RefineOptions& opts) {
  RefinedResult r;
  r.state = initial_state(Y, J, opts);
  const Eigen::Index n = r.state.s.size();
  const auto Yb = blocks_of(Y, J);
  const bool reciprocal = opts.variant == UpdateVariant::Reciprocal;
  for (int it = 1; it <= opts.max_iters; ++it) {
    const PosteriorMoments m = posterior_moments(Y, r.state, J);
    r.block_solves += n;
    HyperState next = r.state;
    const Eigen::VectorXd s_joint = update_s(r.state, m, J, opts);

    const auto X = blocks_of(m.mu, J);
    Eigen::VectorXd q = opts.zero_coupling || J < 2 ? Eigen::VectorXd::Zero(n) : q_from_covariance(X);

    Eigen::MatrixXd u(J, n);
    for (int j = 0; j < J; ++j) u.row(j) = per_frame_u(Yb.row(j).transpose(), r.state, opts.variant, opts.s_max);

    if (reciprocal) {
      Refinement ref = refine_s(s_joint.cwiseInverse(), u, q, opts.vartheta);
      next.s = ref.s.cwiseInverse();
      r.active = std::move(ref.active);
    } else {
      Refinement ref = refine_s(s_joint, u, q, opts.vartheta);
      next.s = std::move(ref.s);
      r.active = std::move(ref.active);
    }
    next.q = q;
    next.clamp_coupling();
    next.beta = opts.fixed_beta ? *opts.fixed_beta : update_beta(r.state, m, Y);
    check_finite(next, it);
    const double change = relative_change(r.state, next);
    r.state = std::move(next);
    r.trace.push_back({it, objective_L(r.state, Y, J), change, r.state.beta});
    r.iterations = it;
    if (change < opts.tol) {
      r.converged = true;
      break;
    }
  }
  r.x = posterior_moments(Y, r.state, J).mu;
  r.block_solves += n;
  return r;
}

namespace {

double diagonal_objective(const Eigen::MatrixXd& Yb, const HyperState& st) {
  const double J = static_cast<double>(Yb.rows());
  const Eigen::ArrayXd c = st.s.array() + 1.0 / st.beta;
  const Eigen::ArrayXd energy = Yb.colwise().squaredNorm().transpose().array();
  return (J * c.log() + energy / c).sum() - 2.0 * st.b * (st.s.sum() + st.beta);
}

}  // namespace

RefinedResult run_refined_jhbl_2d(const Eigen::VectorXd& Y, int J, const RefineOptions& opts) {
  RefinedResult r;
  r.state = initial_state(Y, J, opts);
  const Eigen::Index n = r.state.s.size();
  const auto Yb = blocks_of(Y, J);
  const double N = static_cast<double>(Y.size());
  const double b = r.state.b;
  const double s_min = 1.0 / opts.s_max;
  r.active.assign(n, 0);
  Eigen::MatrixXd mu(J, n);

  for (int it = 1; it <= opts.max_iters; ++it) {
    const HyperState& st = r.state;
    const Eigen::ArrayXd lam = st.s.array() / (1.0 + st.beta * st.s.array());
    mu = (Yb.array().rowwise() * (st.beta * lam).transpose()).matrix();
    const Eigen::ArrayXd energy = mu.colwise().squaredNorm().transpose().array();

    HyperState next = st;
    switch (opts.variant2d) {
      case Diag2DVariant::AsPrinted: next.s = ((J + 2.0) / (energy + 2 * b)).matrix(); break;
      case Diag2DVariant::Reciprocal: next.s = ((energy + 2 * b) / (J + 2.0)).matrix(); break;
      case Diag2DVariant::Restored: next.s = ((energy + J * lam + 2 * b) / (J + 2.0)).matrix(); break;
    }

    if (opts.refine && J >= 2) {
      next.q = q_from_covariance(mu);
      const auto active = threshold_set(next.q, opts.vartheta);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!active[i]) continue;
        if (opts.variant2d == Diag2DVariant::Restored) {
          next.s[i] = (mu.col(i).array().square() + lam[i]).maxCoeff();
          continue;
        }
        const UpdateVariant guard =
            opts.variant2d == Diag2DVariant::AsPrinted ? UpdateVariant::AsPrinted : UpdateVariant::Stabilized;
        double umin = opts.s_max;
        for (int j = 0; j < J; ++j) {
          const double D = mu(j, i) * mu(j, i) + lam[i] - st.s[i] + 2 * b;
          umin = std::min(umin, std::abs(printed_s(D, b, guard, opts.s_max)));
        }
        next.s[i] = opts.variant2d == Diag2DVariant::AsPrinted ? umin : 1.0 / umin;
      }
      r.active = active;
    }
    next.s = next.s.cwiseMax(s_min).cwiseMin(opts.s_max);

    if (opts.fixed_beta) {
      next.beta = *opts.fixed_beta;
    } else {
      const double resid = (Yb - mu).squaredNorm();
      const double spread = opts.variant2d == Diag2DVariant::Restored ? J * lam.sum() : 0.0;
      next.beta = (N + 2.0) / (resid + spread + 2 * b);
    }
    check_finite(next, it);
    const double change =
        std::max(((next.s - st.s).array().abs() / (st.s.array().abs() + 1e-12)).maxCoeff(),
                 std::abs(next.beta - st.beta) / st.beta);
    r.state = std::move(next);
    r.trace.push_back({it, diagonal_objective(Yb, r.state), change, r.state.beta});
    r.iterations = it;
    if (change < opts.tol) {
      r.converged = true;
      break;
    }
  }
  const Eigen::ArrayXd lam = r.state.s.array() / (1.0 + r.state.beta * r.state.s.array());
  mu = (Yb.array().rowwise() * (r.state.beta * lam).transpose()).matrix();
  r.x = mu.reshaped();
  return r;
}

}  // namespace edgestream
