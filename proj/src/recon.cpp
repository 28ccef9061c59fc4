#include "edgestream/recon.hpp"

#include <limits>
#include <numbers>
#include <stdexcept>

namespace edgestream {

namespace {

Eigen::MatrixXd roll_forward(const Eigen::MatrixXd& f, bool along_x) {
  const Eigen::Index r = f.rows(), c = f.cols();
  Eigen::MatrixXd out(r, c);
  if (along_x) {
    for (Eigen::Index x = 0; x < c; ++x) out.col(x) = f.col((x + 1) % c);
  } else {
    for (Eigen::Index y = 0; y < r; ++y) out.row(y) = f.row((y + 1) % r);
  }
  return out;
}

Eigen::MatrixXd roll_back(const Eigen::MatrixXd& f, bool along_x) {
  const Eigen::Index r = f.rows(), c = f.cols();
  Eigen::MatrixXd out(r, c);
  if (along_x) {
    for (Eigen::Index x = 0; x < c; ++x) out.col(x) = f.col((x + c - 1) % c);
  } else {
    for (Eigen::Index y = 0; y < r; ++y) out.row(y) = f.row((y + r - 1) % r);
  }
  return out;
}

// Eigenvalues of the periodic forward difference: e^{2 pi i k / n} - 1.
Eigen::VectorXcd difference_symbol(Eigen::Index n) {
  Eigen::VectorXcd d(n);
  for (Eigen::Index k = 0; k < n; ++k)
    d[k] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n)) - 1.0;
  return d;
}

Eigen::MatrixXcd unitary_fwd(const Eigen::MatrixXd& f) {
  return fft2(f.cast<cdouble>()) / std::sqrt(static_cast<double>(f.size()));
}

Eigen::MatrixXd unitary_inv_real(const Eigen::MatrixXcd& a) {
  return (ifft2(a) * std::sqrt(static_cast<double>(a.size()))).real();
}

}  // namespace

Differences diff_apply(const Eigen::MatrixXd& f) {
  return {roll_forward(f, true) - f, roll_forward(f, false) - f};
}

Eigen::MatrixXd diff_adjoint(const Differences& d) {
  return (roll_back(d.dx, true) - d.dx) + (roll_back(d.dy, false) - d.dy);
}

Eigen::MatrixXcd unitary_data(const SpectralMeasurement& g) {
  return centred_to_fft(g.coeffs) * std::sqrt(static_cast<double>(g.coeffs.size()));
}

Eigen::MatrixXd fft_order_mask(const SpectralMeasurement& g) {
  Eigen::MatrixXcd ones = Eigen::MatrixXcd::Zero(g.coeffs.rows(), g.coeffs.cols());
  for (Eigen::Index x = 0; x < ones.cols(); ++x)
    for (Eigen::Index y = 0; y < ones.rows(); ++y)
      if (g.retained(static_cast<int>(y), static_cast<int>(x))) ones(y, x) = 1.0;
  // The (-1)^l factors are signs, so magnitudes give the mask in FFT order.
  return centred_to_fft(ones).cwiseAbs();
}

AdmmResult admm_weighted_l1(const SpectralMeasurement& g, const Eigen::MatrixXd& W, const AdmmOptions& opts) {
  if (opts.rho <= 0) throw std::invalid_argument("ADMM penalty must be positive");
  const Eigen::Index r = g.coeffs.rows(), c = g.coeffs.cols();
  if (W.rows() != r || W.cols() != c) throw std::invalid_argument("weight map does not match the data");

  const Eigen::MatrixXcd data = unitary_data(g);
  const Eigen::MatrixXd M = fft_order_mask(g);
  const Eigen::VectorXcd sy = difference_symbol(r), sx = difference_symbol(c);
  Eigen::MatrixXd denom(r, c);
  for (Eigen::Index x = 0; x < c; ++x)
    for (Eigen::Index y = 0; y < r; ++y)
      denom(y, x) = M(y, x) + opts.rho * (std::norm(sx[x]) + std::norm(sy[y]));
  denom = (denom.array() > 0).select(denom, 1.0);
  const Eigen::MatrixXcd Mg = M.cast<cdouble>().cwiseProduct(data);
  const Eigen::ArrayXXd thresh = W.array() / opts.rho;

  Differences z{Eigen::MatrixXd::Zero(r, c), Eigen::MatrixXd::Zero(r, c)};
  Differences u = z;
  AdmmResult res;
  res.f = Eigen::MatrixXd::Zero(r, c);
  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd f_best = res.f;

  for (int it = 1; it <= opts.max_iters; ++it) {
    const Eigen::MatrixXcd vx = unitary_fwd(z.dx - u.dx), vy = unitary_fwd(z.dy - u.dy);
    Eigen::MatrixXcd rhs(r, c);
    for (Eigen::Index x = 0; x < c; ++x)
      for (Eigen::Index y = 0; y < r; ++y)
        rhs(y, x) = (Mg(y, x) + opts.rho * (std::conj(sx[x]) * vx(y, x) + std::conj(sy[y]) * vy(y, x))) / denom(y, x);
    res.f = unitary_inv_real(rhs);

    const Differences Lf = diff_apply(res.f);
    const Differences z_old = z;
    z.dx = soft_threshold((Lf.dx + u.dx).array(), thresh).matrix();
    z.dy = soft_threshold((Lf.dy + u.dy).array(), thresh).matrix();
    const Eigen::MatrixXd rx = Lf.dx - z.dx, ry = Lf.dy - z.dy;
    u.dx += rx;
    u.dy += ry;

    res.primal_residual = std::sqrt(rx.squaredNorm() + ry.squaredNorm());
    res.dual_residual = opts.rho * std::sqrt((z.dx - z_old.dx).squaredNorm() + (z.dy - z_old.dy).squaredNorm());
    const double fit = 0.5 * (M.cast<cdouble>().cwiseProduct(unitary_fwd(res.f)) - Mg).squaredNorm();
    const double reg = (W.array() * (Lf.dx.array().abs() + Lf.dy.array().abs())).sum();
    const double obj = fit + reg;
    if (!std::isfinite(obj)) throw std::runtime_error("ADMM objective became non-finite at iteration " + std::to_string(it));
    res.objective.push_back(obj);
    if (obj < best) {
      best = obj;
      f_best = res.f;
    }
    res.iterations = it;
    if (res.primal_residual < opts.tol_primal && res.dual_residual < opts.tol_dual) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) res.f = f_best;
  return res;
}

AdmmResult cs_l1(const SpectralMeasurement& g, double lambda, const AdmmOptions& opts) {
  if (lambda <= 0) throw std::invalid_argument("lambda must be positive");
  return admm_weighted_l1(g, Eigen::MatrixXd::Constant(g.coeffs.rows(), g.coeffs.cols(), lambda), opts);
}

double default_cs_lambda(const SpectralMeasurement& g) { return 0.1 * unitary_data(g).cwiseAbs().maxCoeff(); }

double relative_error(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
  return (estimate - truth).norm() / truth.norm();
}

}  // namespace edgestream
