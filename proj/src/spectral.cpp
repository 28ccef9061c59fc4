#include "edgestream/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace edgestream {

namespace {

constexpr double pi = std::numbers::pi;

void fft_columns(Eigen::MatrixXcd& a, bool inverse) {
  if (a.rows() < 2) return;
  Eigen::FFT<double> fft;
  Eigen::VectorXcd in(a.rows()), out(a.rows());
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    in = a.col(c);
    if (inverse) fft.inv(out, in);
    else fft.fwd(out, in);
    a.col(c) = out;
  }
}

Eigen::MatrixXcd transform(const Eigen::MatrixXcd& a, bool inverse) {
  Eigen::MatrixXcd t = a;
  fft_columns(t, inverse);
  Eigen::MatrixXcd u = t.transpose();
  fft_columns(u, inverse);
  return u.transpose();
}

double parity(int l) { return (l % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

Eigen::MatrixXcd centred_to_fft(const Eigen::MatrixXcd& c) {
  const Eigen::Index r = c.rows(), k = c.cols();
  Eigen::MatrixXcd a(r, k);
  for (Eigen::Index y = 0; y < r; ++y) {
    const int ly = r > 1 ? mode_of(static_cast<int>(y), static_cast<int>(r)) : 0;
    for (Eigen::Index x = 0; x < k; ++x) {
      const int lx = k > 1 ? mode_of(static_cast<int>(x), static_cast<int>(k)) : 0;
      const Eigen::Index fy = r > 1 ? (ly + r) % r : 0;
      const Eigen::Index fx = k > 1 ? (lx + k) % k : 0;
      a(fy, fx) = c(y, x) * parity(ly) * parity(lx);
    }
  }
  return a;
}

Eigen::MatrixXcd fft_to_centred(const Eigen::MatrixXcd& a) {
  const Eigen::Index r = a.rows(), k = a.cols();
  Eigen::MatrixXcd c(r, k);
  for (Eigen::Index y = 0; y < r; ++y) {
    const int ly = r > 1 ? mode_of(static_cast<int>(y), static_cast<int>(r)) : 0;
    for (Eigen::Index x = 0; x < k; ++x) {
      const int lx = k > 1 ? mode_of(static_cast<int>(x), static_cast<int>(k)) : 0;
      const Eigen::Index fy = r > 1 ? (ly + r) % r : 0;
      const Eigen::Index fx = k > 1 ? (lx + k) % k : 0;
      c(y, x) = a(fy, fx) * parity(ly) * parity(lx);
    }
  }
  return c;
}

namespace {

// Integral of e^{i m s} over [lo, hi].
cdouble int_exp(double m, double lo, double hi) {
  if (m == 0) return hi - lo;
  const cdouble im(0, m);
  return (std::exp(im * hi) - std::exp(im * lo)) / im;
}

// Integral of s e^{i m s} over [lo, hi].
cdouble int_s_exp(double m, double lo, double hi) {
  if (m == 0) return 0.5 * (hi * hi - lo * lo);
  const cdouble im(0, m);
  auto prim = [&](double s) { return std::exp(im * s) * (s / im + 1.0 / (m * m)); };
  return prim(hi) - prim(lo);
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Eigen::MatrixXcd fft2(const Eigen::MatrixXcd& a) { return transform(a, false); }
Eigen::MatrixXcd ifft2(const Eigen::MatrixXcd& a) { return transform(a, true); }

bool BandMask::retains(int l) const {
  const int a = std::abs(l);
  for (const auto& [lo, hi] : bands)
    if (a >= lo && a <= hi) return false;
  return true;
}

nlohmann::json BandMask::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [lo, hi] : bands) j.push_back({lo, hi});
  return j;
}

BandMask BandMask::from_json(const nlohmann::json& j) {
  BandMask m;
  for (const auto& b : j) m.bands.emplace_back(b.at(0).get<int>(), b.at(1).get<int>());
  return m;
}

BandMask band_schedule(int j, int dims, int n) {
  if (dims != 1 && dims != 2) throw std::invalid_argument("dims must be 1 or 2");
  BandMask m;
  if (j < 1) return m;
  int lo = dims == 1 ? 10 * j + 13 : 10 * j + 1;
  int hi = dims == 1 ? 10 * j + 15 : 10 * (j + 1);
  // The largest |l| on the centred range is n/2, reached only by l = -n/2.
  hi = std::min(hi, n / 2);
  if (lo <= hi) m.bands.emplace_back(lo, hi);
  return m;
}

double sine_integral_pi() {
  static const double value = [] {
    const int m = 4096;
    const double h = pi / m;
    auto f = [](double t) { return t == 0 ? 1.0 : std::sin(t) / t; };
    double acc = f(0) + f(pi);
    for (int k = 1; k < m; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
    return acc * h / 3.0;
  }();
  return value;
}

double ConcentrationFactor::sigma(double eta) const {
  if (kind == CFKind::Polynomial) return order * pi * std::pow(eta, order);
  return pi * std::sin(pi * eta) / sine_integral_pi();
}

cdouble ConcentrationFactor::tau(int l, int n) const {
  if (l == 0) return 0.0;
  const double sgn = l > 0 ? 1.0 : -1.0;
  return {0.0, sgn * sigma(2.0 * std::abs(l) / n)};
}

bool SpectralMeasurement::retained(int ky, int kx) const {
  if (!mask.retains(mode_of(ky, n))) return false;
  return dims == 1 || mask.retains(mode_of(kx, n));
}

double sigma2_for_snr(const Eigen::MatrixXd& frame, double snr_db) {
  const double mean = frame.mean();
  if (mean == 0) throw std::invalid_argument("SNR is undefined for a zero-mean frame");
  return mean * mean / std::pow(10.0, snr_db / 10.0);
}

double resolve_sigma2(const Eigen::MatrixXd& frame, const NoiseSpec& noise) {
  if (noise.snr_db) return sigma2_for_snr(frame, *noise.snr_db);
  if (noise.sigma2 < 0) throw std::invalid_argument("noise variance must be nonnegative");
  return noise.sigma2;
}

Eigen::MatrixXcd dft_coefficients(const Eigen::MatrixXd& frame) {
  const Eigen::MatrixXcd a = fft2(frame.cast<cdouble>());
  return fft_to_centred(a) / static_cast<double>(frame.size());
}

Eigen::MatrixXd synthesize(const Eigen::MatrixXcd& coeffs) {
  const Eigen::MatrixXcd a = centred_to_fft(coeffs);
  return (ifft2(a) * static_cast<double>(coeffs.size())).real();
}

Eigen::VectorXcd exact_coefficients(const PiecewiseSignal& f, int n) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
  const cdouble I(0, 1);
  for (int k = 0; k < n; ++k) {
    const int l = mode_of(k, n);
    cdouble acc = 0;
    for (const auto& p : f.pieces) {
      acc += p.c0 * int_exp(-l, p.lo, p.hi) + p.c1 * int_s_exp(-l, p.lo, p.hi);
      if (p.amp != 0) {
        const cdouble up = std::exp(I * p.phase) * int_exp(1.0 - l, p.lo, p.hi);
        const cdouble down = std::exp(-I * p.phase) * int_exp(-1.0 - l, p.lo, p.hi);
        acc += p.amp * (up - down) / (2.0 * I);
      }
    }
    c[k] = acc / (2 * pi);
  }
  return c;
}

std::uint64_t frame_seed(std::uint64_t seed, int frame) {
  return splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(frame));
}

SpectralMeasurement measure(const Eigen::MatrixXcd& clean, int dims, const BandMask& mask, double sigma2,
                            std::uint64_t seed, int frame) {
  if (sigma2 < 0) throw std::invalid_argument("noise variance must be nonnegative");
  SpectralMeasurement m;
  m.dims = dims;
  m.n = static_cast<int>(clean.rows());
  m.frame = frame;
  m.mask = mask;
  m.sigma2 = sigma2;
  m.seed = seed;
  m.coeffs = clean;
  const double count = dims == 1 ? m.n : static_cast<double>(m.n) * m.n;
  const double sd = std::sqrt(sigma2 / (2.0 * count));
  std::mt19937_64 rng(frame_seed(seed, frame));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index x = 0; x < m.coeffs.cols(); ++x) {
    for (Eigen::Index y = 0; y < m.coeffs.rows(); ++y) {
      const double re = normal(rng), im = normal(rng);
      if (sigma2 > 0) m.coeffs(y, x) += cdouble(sd * re, sd * im);
      if (!m.retained(static_cast<int>(y), static_cast<int>(x))) m.coeffs(y, x) = 0;
    }
  }
  return m;
}

SpectralMeasurement fourier_sample(const Eigen::MatrixXd& frame, const BandMask& mask, const NoiseSpec& noise,
                                   std::uint64_t seed, int frame_index) {
  const int dims = frame.cols() == 1 ? 1 : 2;
  if (frame.rows() % 2 != 0 || (dims == 2 && frame.rows() != frame.cols()))
    throw std::invalid_argument("frames must be even-length vectors or square even-sized images");
  return measure(dft_coefficients(frame), dims, mask, resolve_sigma2(frame, noise), seed, frame_index);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> cf_edges_axes(const SpectralMeasurement& meas,
                                                          const ConcentrationFactor& cf) {
  const int n = meas.n;
  Eigen::MatrixXcd ax = meas.coeffs, ay = meas.coeffs;
  for (Eigen::Index y = 0; y < ax.rows(); ++y) {
    const cdouble ty = cf.tau(mode_of(static_cast<int>(y), n), n);
    for (Eigen::Index x = 0; x < ax.cols(); ++x) {
      const cdouble tx = meas.dims == 1 ? ty : cf.tau(mode_of(static_cast<int>(x), n), n);
      ax(y, x) *= tx;
      ay(y, x) *= ty;
    }
  }
  Eigen::MatrixXd yx = synthesize(ax);
  Eigen::MatrixXd yy = meas.dims == 1 ? yx : synthesize(ay);
  return {std::move(yx), std::move(yy)};
}

Eigen::MatrixXd cf_edges(const SpectralMeasurement& meas, const ConcentrationFactor& cf) {
  auto [yx, yy] = cf_edges_axes(meas, cf);
  if (meas.dims == 1) return yx;
  return (yx.array().square() + yy.array().square()).sqrt().matrix();
}

double edge_noise_variance(const BandMask& mask, int n, double sigma2, const ConcentrationFactor& cf) {
  double acc = 0;
  for (int k = 0; k < n; ++k) {
    const int l = mode_of(k, n);
    if (mask.retains(l)) acc += std::norm(cf.tau(l, n));
  }
  return 0.5 * acc * sigma2 / n;
}

Eigen::VectorXd stack_measurements(const std::vector<Eigen::MatrixXd>& frames) {
  if (frames.empty()) throw std::invalid_argument("no frames to stack");
  const Eigen::Index len = frames.front().size();
  const int J = static_cast<int>(frames.size());
  Eigen::VectorXd Y(len * J);
  auto B = blocks_of(Y, J);
  for (int j = 0; j < J; ++j) {
    if (frames[j].size() != len) throw std::invalid_argument("frames differ in length");
    B.row(j) = frames[j].reshaped().transpose();
  }
  return Y;
}

std::vector<Eigen::MatrixXd> unstack_measurements(const Eigen::VectorXd& Y, int J, Eigen::Index rows,
                                                  Eigen::Index cols) {
  if (J < 1 || Y.size() != rows * cols * J) throw std::invalid_argument("stacked vector has the wrong length");
  const auto B = blocks_of(Y, J);
  std::vector<Eigen::MatrixXd> out;
  for (int j = 0; j < J; ++j) out.push_back(B.row(j).transpose().reshaped(rows, cols));
  return out;
}

}  // namespace edgestream
