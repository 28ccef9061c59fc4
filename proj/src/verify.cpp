#include "edgestream/verify.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "edgestream/jhbl.hpp"
#include "edgestream/recon.hpp"
#include "edgestream/scene.hpp"
#include "edgestream/spectral.hpp"

namespace edgestream {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

Check check(const std::string& name, double err, double tol) {
  return {name, std::isfinite(err) && err <= tol, "error " + fmt(err) + " (tolerance " + fmt(tol) + ")"};
}

Check dft_against_direct_sum() {
  const int n = 8;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Eigen::MatrixXd f(n, n);
  for (Eigen::Index k = 0; k < f.size(); ++k) f(k) = g(rng);
  const Eigen::MatrixXcd c = dft_coefficients(f);
  const Grid1D grid = Grid1D::make(n);
  double err = 0;
  for (int ky = 0; ky < n; ++ky) {
    for (int kx = 0; kx < n; ++kx) {
      cdouble sum = 0;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
          sum += f(y, x) * std::polar(1.0, -(mode_of(ky, n) * grid.points[y] + mode_of(kx, n) * grid.points[x]));
      err = std::max(err, std::abs(sum / double(n * n) - c(ky, kx)));
    }
  }
  err = std::max(err, (synthesize(c) - f).cwiseAbs().maxCoeff());
  return check("dft matches direct sum and inverts", err, 1e-12);
}

Check exact_coefficients_against_quadrature() {
  const PiecewiseSignal f = example_signal(2);
  const int n = 32, m = 200000;
  const Eigen::VectorXcd c = exact_coefficients(f, n);
  double err = 0;
  for (int l : {-5, -1, 0, 3, 9}) {
    cdouble sum = 0;
    for (int t = 0; t < m; ++t) {
      const double s = -std::numbers::pi + (t + 0.5) * 2 * std::numbers::pi / m;
      sum += f(s) * std::polar(1.0, -l * s);
    }
    err = std::max(err, std::abs(sum / double(m) - c[slot_of(l, n)]));
  }
  return check("exact coefficients match midpoint quadrature", err, 1e-4);
}

Check sine_integral_value() {
  return check("sine integral at pi", std::abs(sine_integral_pi() - 1.851937051982466), 1e-10);
}

Check evidence_against_dense() {
  const int J = 3, n = 4;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Eigen::VectorXd Y(n * J);
  for (auto& v : Y) v = g(rng);
  HyperState st;
  st.s = Eigen::VectorXd::LinSpaced(n, 0.5, 2.0);
  st.q = 0.2 * st.s;
  st.beta = 3.0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n * J, n * J) / st.beta;
  for (int i = 0; i < n; ++i) C.block(i * J, i * J, J, J) += prior_block(st.s[i], st.q[i], J);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(C);
  const double logdet = ldlt.vectorD().array().log().sum();
  const double dense = -0.5 * (Y.size() * std::log(2 * std::numbers::pi) + logdet + Y.dot(ldlt.solve(Y)));
  double err = std::abs(dense - log_evidence(Y, st, J));

  const PosteriorMoments m = posterior_moments(Y, st, J);
  Eigen::MatrixXd S = C - Eigen::MatrixXd::Identity(n * J, n * J) / st.beta;
  const Eigen::MatrixXd Lam = (Eigen::MatrixXd::Identity(n * J, n * J) + st.beta * S).lu().solve(S);
  err = std::max(err, (m.mu - st.beta * Lam * Y).cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) err = std::max(err, (m.lambda[i] - Lam.block(i * J, i * J, J, J)).cwiseAbs().maxCoeff());
  return check("evidence and posterior match dense algebra", err, 1e-10);
}

Check admm_full_data_recovery() {
  const int n = 32;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  f.block(8, 10, 12, 9).setConstant(1.0);
  BandMask none;
  SpectralMeasurement g = measure(dft_coefficients(f), 2, none, 0.0, 1, 1);
  AdmmOptions opts;
  opts.max_iters = 500;
  const AdmmResult r = cs_l1(g, 1e-6, opts);
  return check("admm recovers fully sampled piecewise-constant image", relative_error(r.f, f), 1e-3);
}

}  // namespace

std::vector<Check> run_verification() {
  std::vector<Check> out;
  for (auto fn : {dft_against_direct_sum, exact_coefficients_against_quadrature, sine_integral_value,
                  evidence_against_dense, admm_full_data_recovery}) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

}  // namespace edgestream
