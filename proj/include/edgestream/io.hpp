#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "edgestream/spectral.hpp"

namespace edgestream {

// Raw little-endian float64 arrays (complex values interleaved re, im) in
// column-major order, with a JSON sidecar at path + ".json".
void write_raw(const std::string& path, const Eigen::MatrixXd& a, nlohmann::json meta = {});
void write_raw(const std::string& path, const Eigen::MatrixXcd& a, nlohmann::json meta = {});
nlohmann::json read_sidecar(const std::string& path);
Eigen::MatrixXd read_raw_real(const std::string& path);
Eigen::MatrixXcd read_raw_complex(const std::string& path);

void write_measurement(const std::string& path, const SpectralMeasurement& m);
SpectralMeasurement read_measurement(const std::string& path);

// 16-bit binary PGM with values mapped linearly from [lo, hi] to [0, 65535].
void write_pgm(const std::string& path, const Eigen::MatrixXd& img, double lo, double hi);
void write_pgm(const std::string& path, const Eigen::MatrixXd& img);

struct PlotSeries {
  std::string name;
  Eigen::VectorXd values;
  std::string colour;
};
void write_svg_plot(const std::string& path, const std::string& title, const Eigen::VectorXd& x,
                    const std::vector<PlotSeries>& series);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Eigen::VectorXd>& columns);
void write_json(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::string& path);

}  // namespace edgestream
