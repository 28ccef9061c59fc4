#include "edgestream/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace edgestream {

namespace {

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

void write_doubles(const std::string& path, const double* data, size_t count) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (size_t i = 0; i < count; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, data + i, sizeof bits);
    bits = to_little(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw std::runtime_error("short write to " + path);
}

std::vector<double> read_doubles(const std::string& path, size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> v(count);
  for (size_t i = 0; i < count; ++i) {
    std::uint64_t bits;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw std::runtime_error(path + ": truncated array");
    bits = to_little(bits);
    std::memcpy(&v[i], &bits, sizeof bits);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error(path + ": trailing bytes");
  return v;
}

}  // namespace

void write_json(const std::string& path, const nlohmann::json& doc) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_raw(const std::string& path, const Eigen::MatrixXd& a, nlohmann::json meta) {
  write_doubles(path, a.data(), static_cast<size_t>(a.size()));
  meta["shape"] = {a.rows(), a.cols()};
  meta["dtype"] = "float64";
  meta["order"] = "column-major";
  write_json(path + ".json", meta);
}

void write_raw(const std::string& path, const Eigen::MatrixXcd& a, nlohmann::json meta) {
  write_doubles(path, reinterpret_cast<const double*>(a.data()), static_cast<size_t>(a.size()) * 2);
  meta["shape"] = {a.rows(), a.cols()};
  meta["dtype"] = "complex128";
  meta["order"] = "column-major";
  write_json(path + ".json", meta);
}

nlohmann::json read_sidecar(const std::string& path) { return read_json(path + ".json"); }

Eigen::MatrixXd read_raw_real(const std::string& path) {
  const auto meta = read_sidecar(path);
  if (meta.value("dtype", std::string()) != "float64") throw std::runtime_error(path + ": expected float64 data");
  const Eigen::Index r = meta.at("shape").at(0), c = meta.at("shape").at(1);
  const auto v = read_doubles(path, static_cast<size_t>(r * c));
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), r, c);
}

Eigen::MatrixXcd read_raw_complex(const std::string& path) {
  const auto meta = read_sidecar(path);
  if (meta.value("dtype", std::string()) != "complex128") throw std::runtime_error(path + ": expected complex data");
  const Eigen::Index r = meta.at("shape").at(0), c = meta.at("shape").at(1);
  const auto v = read_doubles(path, static_cast<size_t>(r * c * 2));
  return Eigen::Map<const Eigen::MatrixXcd>(reinterpret_cast<const cdouble*>(v.data()), r, c);
}

void write_measurement(const std::string& path, const SpectralMeasurement& m) {
  nlohmann::json meta;
  meta["kind"] = "spectral";
  meta["n"] = m.n;
  meta["dims"] = m.dims;
  meta["frame"] = m.frame;
  meta["mask"] = m.mask.to_json();
  meta["sigma2"] = m.sigma2;
  meta["seed"] = m.seed;
  meta["layout"] = "centred";
  write_raw(path, m.coeffs, meta);
}

SpectralMeasurement read_measurement(const std::string& path) {
  const auto meta = read_sidecar(path);
  SpectralMeasurement m;
  m.coeffs = read_raw_complex(path);
  m.n = meta.at("n");
  m.dims = meta.at("dims");
  m.frame = meta.value("frame", 1);
  m.mask = BandMask::from_json(meta.at("mask"));
  m.sigma2 = meta.at("sigma2");
  m.seed = meta.at("seed");
  return m;
}

void write_pgm(const std::string& path, const Eigen::MatrixXd& img, double lo, double hi) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n65535\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (Eigen::Index y = 0; y < img.rows(); ++y) {
    for (Eigen::Index x = 0; x < img.cols(); ++x) {
      const double t = std::clamp((img(y, x) - lo) / span, 0.0, 1.0);
      const auto v = static_cast<std::uint16_t>(std::lround(t * 65535.0));
      const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
      out.write(bytes, 2);
    }
  }
}

void write_pgm(const std::string& path, const Eigen::MatrixXd& img) {
  write_pgm(path, img, img.minCoeff(), img.maxCoeff());
}

void write_svg_plot(const std::string& path, const std::string& title, const Eigen::VectorXd& x,
                    const std::vector<PlotSeries>& series) {
  const double W = 720, H = 360, pad = 40;
  double ylo = 0, yhi = 0;
  for (const auto& s : series) {
    ylo = std::min(ylo, s.values.minCoeff());
    yhi = std::max(yhi, s.values.maxCoeff());
  }
  if (yhi == ylo) yhi = ylo + 1;
  const double xlo = x.minCoeff(), xhi = x.maxCoeff() > xlo ? x.maxCoeff() : xlo + 1;
  auto px = [&](double v) { return pad + (v - xlo) / (xhi - xlo) * (W - 2 * pad); };
  auto py = [&](double v) { return H - pad - (v - ylo) / (yhi - ylo) * (H - 2 * pad); };

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << pad << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
  svg << "<line x1=\"" << pad << "\" y1=\"" << py(0) << "\" x2=\"" << W - pad << "\" y2=\"" << py(0)
      << "\" stroke=\"#999\"/>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    svg << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.5\" points=\"";
    for (Eigen::Index i = 0; i < x.size(); ++i) svg << px(x[i]) << ',' << py(s.values[i]) << ' ';
    svg << "\"/>\n";
    svg << "<text x=\"" << W - pad - 140 << "\" y=\"" << 40 + 16 * k << "\" font-size=\"12\" fill=\"" << s.colour
        << "\">" << s.name << "</text>\n";
  }
  svg << "</svg>\n";
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << svg.str();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Eigen::VectorXd>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("CSV header and columns differ");
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n' << std::setprecision(17);
  const Eigen::Index rows = columns.empty() ? 0 : columns.front().size();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << columns[k][i];
    out << '\n';
  }
}

}  // namespace edgestream
