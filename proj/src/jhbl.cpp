#include "edgestream/jhbl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace edgestream {

void HyperState::clamp_coupling() {
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double bound = kCouplingBound * s[i];
    q[i] = std::clamp(q[i], -bound, bound);
  }
}

std::string to_string(UpdateVariant v) {
  switch (v) {
    case UpdateVariant::AsPrinted: return "as-printed";
    case UpdateVariant::Stabilized: return "stabilized";
    case UpdateVariant::Reciprocal: return "reciprocal";
  }
  return "reciprocal";
}

UpdateVariant parse_variant(const std::string& s) {
  if (s == "as-printed") return UpdateVariant::AsPrinted;
  if (s == "stabilized") return UpdateVariant::Stabilized;
  if (s == "reciprocal") return UpdateVariant::Reciprocal;
  throw std::invalid_argument("unknown update variant: " + s);
}

double PosteriorMoments::trace_lambda() const {
  double t = 0;
  for (const auto& L : lambda) t += L.trace();
  return t;
}

Eigen::MatrixXd prior_block(double s, double q, int J) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(J, J) * s;
  for (int k = 0; k + 1 < J; ++k) S(k, k + 1) = S(k + 1, k) = q;
  return S;
}

std::vector<Eigen::MatrixXd> assemble_prior(HyperState state, int J) {
  state.clamp_coupling();
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(state.s.size());
  for (Eigen::Index i = 0; i < state.s.size(); ++i) blocks.push_back(prior_block(state.s[i], state.q[i], J));
  return blocks;
}

PosteriorMoments posterior_moments(const Eigen::VectorXd& Y, const HyperState& state, int J) {
  const Eigen::Index n = state.s.size();
  if (Y.size() != n * J) throw std::invalid_argument("stacked data length does not match the state");
  const auto blocks = assemble_prior(state, J);
  const auto Yb = Eigen::Map<const Eigen::MatrixXd>(Y.data(), J, n);
  PosteriorMoments m;
  m.mu.resize(Y.size());
  m.lambda.resize(n);
  auto Mb = Eigen::Map<Eigen::MatrixXd>(m.mu.data(), J, n);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(J, J);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd& S = blocks[i];
    // (beta I + S^-1)^-1 = (I + beta S)^-1 S, which stays accurate when S is tiny.
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(I + state.beta * S);
    Eigen::MatrixXd L = lu.solve(S);
    L = 0.5 * (L + L.transpose()).eval();
    Mb.col(i) = state.beta * L * Yb.col(i);
    m.lambda[i] = std::move(L);
  }
  return m;
}

HyperState initial_state(const Eigen::VectorXd& Y, int J, const SolverOptions& opts) {
  if (J < 1 || Y.size() % J != 0) throw std::invalid_argument("data length must be a multiple of J");
  const Eigen::Index n = Y.size() / J;
  HyperState st;
  st.s = Eigen::VectorXd::Ones(n);
  st.q = Eigen::VectorXd::Zero(n);
  if (opts.fixed_beta) {
    st.beta = *opts.fixed_beta;
  } else {
    const double var = (Y.array() - Y.mean()).square().mean();
    st.beta = var > 0 ? 1.0 / var : 1.0;
  }
  return st;
}

namespace {

// Per-block log-determinant and quadratic form of beta^-1 I + Sigma_i.
std::pair<double, double> evidence_terms(const Eigen::VectorXd& Y, const HyperState& state, int J) {
  const auto blocks = assemble_prior(state, J);
  const auto Yb = Eigen::Map<const Eigen::MatrixXd>(Y.data(), J, state.s.size());
  double logdet = 0, quad = 0;
  for (size_t i = 0; i < blocks.size(); ++i) {
    Eigen::MatrixXd C = blocks[i];
    C.diagonal().array() += 1.0 / state.beta;
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success) throw std::runtime_error("marginal covariance block is not positive definite");
    logdet += 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    quad += Yb.col(i).dot(llt.solve(Yb.col(i)));
  }
  return {logdet, quad};
}

}  // namespace

double log_evidence(const Eigen::VectorXd& Y, const HyperState& state, int J) {
  const auto [logdet, quad] = evidence_terms(Y, state, J);
  return -0.5 * (Y.size() * std::log(2 * std::numbers::pi) + logdet + quad);
}

double objective_L(const HyperState& state, const Eigen::VectorXd& Y, int J) {
  const auto [logdet, quad] = evidence_terms(Y, state, J);
  HyperState c = state;
  c.clamp_coupling();
  return logdet + quad - 2.0 * c.b * (c.s.sum() + c.q.sum() + c.beta);
}

double s_bracket(const PosteriorMoments& m, const HyperState& state, Eigen::Index i, int J) {
  const auto mu = m.mu.segment(i * J, J);
  return mu.squaredNorm() / J + m.lambda[i].diagonal().mean() - state.s[i] + 2.0 * state.b;
}

double q_bracket(const PosteriorMoments& m, const HyperState& state, Eigen::Index i, int J,
                 CouplingReading reading) {
  const auto mu = m.mu.segment(i * J, J);
  if (reading == CouplingReading::CrossBlock) {
    if (i + 1 >= state.s.size()) return state.b;
    return mu.dot(m.mu.segment((i + 1) * J, J)) / J + state.b;
  }
  if (J < 2) return state.b;
  const double lag_mu = mu.head(J - 1).dot(mu.tail(J - 1)) / J;
  const double q = std::clamp(state.q[i], -kCouplingBound * state.s[i], kCouplingBound * state.s[i]);
  return lag_mu + lag_average(m.lambda[i]) - lag_average(prior_block(state.s[i], q, J)) + state.b;
}

double printed_s(double bracket, double b, UpdateVariant variant, double s_max) {
  if (variant == UpdateVariant::AsPrinted) return bracket <= 2.0 * b * 1e-3 ? s_max : 2.0 / bracket;
  const double d = std::abs(bracket);
  return d == 0 ? s_max : std::min(2.0 / d, s_max);
}

double printed_q(double bracket, double s_max) {
  return bracket == 0 ? s_max : 1.0 / bracket;
}

Eigen::VectorXd update_s(const HyperState& state, const PosteriorMoments& m, int J, const SolverOptions& opts) {
  Eigen::VectorXd s(state.s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double D = s_bracket(m, state, i, J);
    if (opts.variant == UpdateVariant::Reciprocal)
      s[i] = 1.0 / printed_s(D, state.b, UpdateVariant::Stabilized, opts.s_max);
    else
      s[i] = printed_s(D, state.b, opts.variant, opts.s_max);
  }
  return s;
}

Eigen::VectorXd update_q(const HyperState& state, const PosteriorMoments& m, const Eigen::VectorXd& s_new, int J,
                         const SolverOptions& opts) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(state.s.size());
  if (opts.zero_coupling || J < 2) return q;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double D = q_bracket(m, state, i, J, opts.reading);
    const double v = opts.variant == UpdateVariant::Reciprocal ? D : printed_q(D, opts.s_max);
    q[i] = std::clamp(v, -kCouplingBound * s_new[i], kCouplingBound * s_new[i]);
  }
  return q;
}

double update_beta(const HyperState& state, const PosteriorMoments& m, const Eigen::VectorXd& Y) {
  const double N = static_cast<double>(Y.size());
  return (2.0 * N + 2.0) / (m.trace_lambda() + (Y - m.mu).squaredNorm() + 2.0 * state.b);
}

Partials partials_L(const HyperState& state, const Eigen::VectorXd& Y, int J, CouplingReading reading) {
  const PosteriorMoments m = posterior_moments(Y, state, J);
  const Eigen::Index n = state.s.size();
  Partials p;
  p.s.resize(n);
  p.q.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.s[i] = 2.0 - state.s[i] * s_bracket(m, state, i, J);
    p.q[i] = 2.0 - 2.0 * state.q[i] * q_bracket(m, state, i, J, reading);
  }
  const double N = static_cast<double>(Y.size());
  p.beta = (N + 2.0) - state.beta * (m.trace_lambda() + (Y - m.mu).squaredNorm() + 2.0 * state.b);
  return p;
}

double relative_change(const HyperState& before, const HyperState& after) {
  constexpr double guard = 1e-12;
  double c = ((after.s - before.s).array().abs() / (before.s.array().abs() + guard)).maxCoeff();
  if (before.q.size())
    c = std::max(c, ((after.q - before.q).array().abs() / (before.q.array().abs() + guard)).maxCoeff());
  return std::max(c, std::abs(after.beta - before.beta) / (std::abs(before.beta) + guard));
}

void check_finite(const HyperState& state, int iteration) {
  if (!state.s.allFinite() || !state.q.allFinite() || !std::isfinite(state.beta) || state.beta <= 0 ||
      (state.s.array() <= 0).any())
    throw SolverDivergence("non-finite or non-positive hyper-parameters at iteration " + std::to_string(iteration),
                           iteration);
}

SolverResult run_jhbl(const Eigen::VectorXd& Y, int J, const SolverOptions& opts) {
  SolverResult r;
  r.state = initial_state(Y, J, opts);
  for (int it = 1; it <= opts.max_iters; ++it) {
    const PosteriorMoments m = posterior_moments(Y, r.state, J);
    HyperState next = r.state;
    next.s = update_s(r.state, m, J, opts);
    next.q = update_q(r.state, m, next.s, J, opts);
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
  return r;
}

}  // namespace edgestream
