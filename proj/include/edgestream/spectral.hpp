#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "edgestream/scene.hpp"

namespace edgestream {

using cdouble = std::complex<double>;

// Unnormalised forward and inverse DFT over both axes (inverse divides by the size).
Eigen::MatrixXcd fft2(const Eigen::MatrixXcd& a);
Eigen::MatrixXcd ifft2(const Eigen::MatrixXcd& a);

// Centred coefficient arrays to FFT order (mode l at l mod n) and back. Each
// axis is multiplied by (-1)^l because the grid starts at -pi.
Eigen::MatrixXcd centred_to_fft(const Eigen::MatrixXcd& c);
Eigen::MatrixXcd fft_to_centred(const Eigen::MatrixXcd& a);

struct BandMask {
  std::vector<std::pair<int, int>> bands;

  bool retains(int l) const;
  nlohmann::json to_json() const;
  static BandMask from_json(const nlohmann::json& j);
};

// Missing band for frame j (from 1); bands past the Nyquist range are clipped or dropped.
BandMask band_schedule(int j, int dims, int n);

enum class CFKind { Trigonometric, Polynomial };

struct ConcentrationFactor {
  CFKind kind = CFKind::Trigonometric;
  int order = 1;

  double sigma(double eta) const;
  cdouble tau(int l, int n) const;
};

// Sine integral at pi by composite Simpson quadrature.
double sine_integral_pi();

struct SpectralMeasurement {
  int dims = 1;
  int n = 0;
  int frame = 1;
  // Centred layout: row k holds mode k - n/2; in 2D rows index l_y and columns l_x.
  Eigen::MatrixXcd coeffs;
  BandMask mask;
  double sigma2 = 0;
  std::uint64_t seed = 0;

  bool retained(int ky, int kx) const;
};

struct NoiseSpec {
  std::optional<double> snr_db;
  double sigma2 = 0;
};

double sigma2_for_snr(const Eigen::MatrixXd& frame, double snr_db);
double resolve_sigma2(const Eigen::MatrixXd& frame, const NoiseSpec& noise);

// Normalised coefficients (1/N) sum f e^{-i l s} on the centred range.
Eigen::MatrixXcd dft_coefficients(const Eigen::MatrixXd& frame);
// Exact continuous coefficients (1/2pi) integral f e^{-i l s} ds.
Eigen::VectorXcd exact_coefficients(const PiecewiseSignal& f, int n);
// Inverse of dft_coefficients; the imaginary part is discarded.
Eigen::MatrixXd synthesize(const Eigen::MatrixXcd& coeffs);

std::uint64_t frame_seed(std::uint64_t seed, int frame);

// Adds complex Gaussian noise of image-domain variance sigma2 and zeroes masked modes.
SpectralMeasurement measure(const Eigen::MatrixXcd& clean, int dims, const BandMask& mask, double sigma2,
                            std::uint64_t seed, int frame);
SpectralMeasurement fourier_sample(const Eigen::MatrixXd& frame, const BandMask& mask, const NoiseSpec& noise,
                                   std::uint64_t seed, int frame_index);

Eigen::MatrixXd cf_edges(const SpectralMeasurement& meas, const ConcentrationFactor& cf = {});
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> cf_edges_axes(const SpectralMeasurement& meas,
                                                          const ConcentrationFactor& cf = {});

// Variance of the 1D edge-domain noise produced by cf_edges for the given mask and sigma2.
double edge_noise_variance(const BandMask& mask, int n, double sigma2, const ConcentrationFactor& cf = {});

// Location-major stacking: entry i*J + j holds frame j at location i.
Eigen::VectorXd stack_measurements(const std::vector<Eigen::MatrixXd>& frames);
std::vector<Eigen::MatrixXd> unstack_measurements(const Eigen::VectorXd& Y, int J, Eigen::Index rows,
                                                  Eigen::Index cols);

// J x (locations) view of a stacked vector; column i is block i.
inline Eigen::Map<const Eigen::MatrixXd> blocks_of(const Eigen::VectorXd& Y, int J) {
  return {Y.data(), J, Y.size() / J};
}
inline Eigen::Map<Eigen::MatrixXd> blocks_of(Eigen::VectorXd& Y, int J) { return {Y.data(), J, Y.size() / J}; }

}  // namespace edgestream
