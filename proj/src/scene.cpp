#include "edgestream/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <png.h>

namespace edgestream {

namespace {
constexpr double pi = std::numbers::pi;
}

double Piece::value(double s) const { return c0 + c1 * s + amp * std::sin(s + phase); }

double PiecewiseSignal::operator()(double s) const { return right_limit(s); }

double PiecewiseSignal::right_limit(double s) const {
  for (const auto& p : pieces)
    if (p.lo <= s && s < p.hi) return p.value(s);
  return 0.0;
}

double PiecewiseSignal::left_limit(double s) const {
  for (const auto& p : pieces)
    if (p.lo < s && s <= p.hi) return p.value(s);
  return 0.0;
}

Eigen::VectorXd PiecewiseSignal::sample(const Grid1D& grid) const {
  Eigen::VectorXd out(grid.n);
  for (int i = 0; i < grid.n; ++i) out[i] = (*this)(grid.points[i]);
  return out;
}

JumpList PiecewiseSignal::jumps() const {
  std::set<double> breaks;
  for (const auto& p : pieces) {
    if (!(p.lo < p.hi)) throw std::invalid_argument("piece interval must satisfy lo < hi");
    breaks.insert(p.lo);
    breaks.insert(p.hi);
  }
  JumpList out;
  for (double x : breaks) {
    const double v = right_limit(x) - left_limit(x);
    if (std::abs(v) > 1e-14) out.push_back({x, v});
  }
  return out;
}

Eigen::VectorXd jump_oracle(const PiecewiseSignal& signal, const Grid1D& grid) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(grid.n);
  std::vector<bool> used(grid.n, false);
  for (const auto& jmp : signal.jumps()) {
    if (jmp.location < -pi || jmp.location >= pi)
      throw std::invalid_argument("jump location outside [-pi, pi)");
    const int i = grid.nearest(jmp.location);
    if (used[i]) throw std::runtime_error("two jumps map to the same grid index; refine the grid");
    used[i] = true;
    x[i] = jmp.value;
  }
  return x;
}

PiecewiseSignal example_signal(int j) {
  PiecewiseSignal f;
  const double shift = 0.1 * j;
  f.pieces.push_back({-3 * pi / 4 - 0.5 + shift, -pi / 2 - 0.5 + shift, 1.5, 0, 0, 0});
  f.pieces.push_back({-pi / 4, pi / 8, 7.0 / 4.0, -0.5, 1.0, -pi / 4});
  f.pieces.push_back({3 * pi / 8, 3 * pi / 4, -5.0, 11.0 / 4.0, 0, 0});
  return f;
}

SceneSequence make_example_sequence(int J, int n) {
  if (J < 1) throw std::invalid_argument("J must be at least 1");
  if (n < 16 || n % 2 != 0) throw std::invalid_argument("n must be even and at least 16");
  const Grid1D grid = Grid1D::make(n);
  SceneSequence seq;
  seq.dims = 1;
  seq.n = n;
  seq.J = J;
  seq.kind = "example41";
  for (int j = 1; j <= J; ++j) {
    auto sig = example_signal(j);
    seq.frames.push_back(sig.sample(grid));
    seq.edges.push_back(jump_oracle(sig, grid));
    seq.jumps.push_back(sig.jumps());
    seq.signals.push_back(std::move(sig));
  }
  return seq;
}

void paint(Eigen::MatrixXd& image, const Shape& shape, int j) {
  const double cx = shape.cx + j * shape.vx;
  const double cy = shape.cy + j * shape.vy;
  const double th = shape.rot + j * shape.spin;
  const double c = std::cos(th), s = std::sin(th);
  const double reach = std::max(shape.ax, shape.ay);
  const int n = static_cast<int>(image.rows());
  if (cx - reach < 0 || cy - reach < 0 || cx + reach > n - 1 || cy + reach > n - 1)
    throw std::invalid_argument("shape leaves the image in frame " + std::to_string(j));
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double u = (c * dx + s * dy) / shape.ax;
      const double v = (-s * dx + c * dy) / shape.ay;
      const bool inside = shape.kind == ShapeKind::Ellipse ? u * u + v * v <= 1.0
                                                           : std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
      if (inside) image(y, x) = shape.magnitude;
    }
  }
}

Eigen::MatrixXd builtin_base(int n) {
  const double k = n / 64.0;
  Eigen::MatrixXd img = Eigen::MatrixXd::Zero(n, n);
  paint(img, {ShapeKind::Ellipse, 32 * k, 32 * k, 30 * k, 27 * k, 0.0, 0.45}, 0);
  paint(img, {ShapeKind::Ellipse, 30 * k, 22 * k, 20 * k, 9 * k, 0.0, 0.2}, 0);
  paint(img, {ShapeKind::Ellipse, 24 * k, 44 * k, 6 * k, 5 * k, 0.4, 0.75}, 0);
  return img;
}

Eigen::MatrixXd edge_mask_2d(const Eigen::MatrixXd& f) {
  const Eigen::Index r = f.rows(), c = f.cols();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(r, c);
  for (Eigen::Index y = 0; y < r; ++y) {
    for (Eigen::Index x = 0; x < c; ++x) {
      double d = 0;
      if (y > 0) d = std::max(d, std::abs(f(y, x) - f(y - 1, x)));
      if (y + 1 < r) d = std::max(d, std::abs(f(y, x) - f(y + 1, x)));
      if (x > 0) d = std::max(d, std::abs(f(y, x) - f(y, x - 1)));
      if (x + 1 < c) d = std::max(d, std::abs(f(y, x) - f(y, x + 1)));
      m(y, x) = d;
    }
  }
  return m;
}

SceneSequence make_phantom_sequence_2d(const PhantomSpec& spec) {
  if (spec.J < 1) throw std::invalid_argument("J must be at least 1");
  if (spec.n < 16 || spec.n % 2 != 0) throw std::invalid_argument("n must be even and at least 16");
  const Eigen::MatrixXd base = spec.base.size() ? spec.base : builtin_base(spec.n);
  if (base.rows() != spec.n || base.cols() != spec.n)
    throw std::invalid_argument("base image does not match the requested size");

  SceneSequence seq;
  seq.dims = 2;
  seq.n = spec.n;
  seq.J = spec.J;
  seq.kind = "phantom2d";
  for (int j = 1; j <= spec.J; ++j) {
    Eigen::MatrixXd frame = base;
    Eigen::MatrixXd movers = Eigen::MatrixXd::Zero(spec.n, spec.n);
    for (const auto& sh : spec.shapes) {
      paint(frame, sh, j);
      if (sh.moving()) paint(movers, sh, j);
    }
    Eigen::MatrixXd edges = edge_mask_2d(frame);
    Eigen::MatrixXd mov = edge_mask_2d(movers);
    mov = (edges.array() > 0).select(mov, 0.0);
    seq.frames.push_back(std::move(frame));
    seq.edges.push_back(std::move(edges));
    seq.moving_edges.push_back(std::move(mov));
  }
  return seq;
}

PhantomSpec default_scene_spec(int n, int J) {
  const double k = n / 64.0;
  PhantomSpec spec;
  spec.n = n;
  spec.J = J;
  spec.shapes.push_back({ShapeKind::Ellipse, 44 * k, 44 * k, 4 * k, 3 * k, 0.0, 1.5});
  spec.shapes.push_back({ShapeKind::Ellipse, 14 * k, 22 * k, 5 * k, 3.5 * k, 0.0, 1.0, 2 * k, 0, 0.25});
  spec.shapes.push_back({ShapeKind::Ellipse, 38 * k, 22 * k, 3.5 * k, 5 * k, 0.0, 1.0, -2 * k, 0, -0.2});
  return spec;
}

PhantomSpec mri_style_spec(int n, int J) {
  const double k = n / 64.0;
  PhantomSpec spec;
  spec.n = n;
  spec.J = J;
  spec.shapes.push_back({ShapeKind::Ellipse, 16 * k, 14 * k, 5 * k, 3.5 * k, 0.0, 1.0, 0, 2 * k, 0.25});
  spec.shapes.push_back({ShapeKind::Ellipse, 46 * k, 38 * k, 3.5 * k, 5 * k, 0.0, 1.0, 0, -2 * k, -0.2});
  return spec;
}

PhantomSpec phantom_spec_from_json(const nlohmann::json& doc) {
  PhantomSpec spec;
  spec.n = doc.value("n", 64);
  spec.J = doc.value("J", 4);
  const std::string base = doc.value("base", std::string("builtin"));
  if (base == "none") {
    spec.base = Eigen::MatrixXd::Zero(spec.n, spec.n);
  } else if (base != "builtin") {
    spec.base = load_grayscale(base);
    if (spec.base.rows() != spec.n) throw std::invalid_argument("base image size differs from n");
  }
  if (!doc.contains("shapes")) {
    spec.shapes = default_scene_spec(spec.n, spec.J).shapes;
    return spec;
  }
  for (const auto& s : doc.at("shapes")) {
    Shape sh;
    const std::string kind = s.value("kind", std::string("ellipse"));
    if (kind == "ellipse") sh.kind = ShapeKind::Ellipse;
    else if (kind == "rectangle") sh.kind = ShapeKind::Rectangle;
    else throw std::invalid_argument("unknown shape kind: " + kind);
    sh.cx = s.at("cx");
    sh.cy = s.at("cy");
    sh.ax = s.at("ax");
    sh.ay = s.at("ay");
    sh.rot = s.value("rot", 0.0);
    sh.magnitude = s.value("magnitude", 1.0);
    sh.vx = s.value("vx", 0.0);
    sh.vy = s.value("vy", 0.0);
    sh.spin = s.value("spin", 0.0);
    spec.shapes.push_back(sh);
  }
  return spec;
}

SceneSequence scene_from_json(const nlohmann::json& doc) {
  const std::string kind = doc.value("kind", std::string("example41"));
  if (kind == "example41") return make_example_sequence(doc.value("J", 6), doc.value("n", 128));
  if (kind == "phantom2d") return make_phantom_sequence_2d(phantom_spec_from_json(doc));
  throw std::invalid_argument("unknown scene kind: " + kind);
}

namespace {

std::string next_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

Eigen::MatrixXd load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") throw std::runtime_error(path + ": not a PGM file");
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw std::runtime_error(path + ": bad PGM header");
  Eigen::MatrixXd img(h, w);
  if (magic == "P2") {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img(y, x) = std::stod(next_token(in)) / maxval;
  } else {
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> buf(static_cast<size_t>(w) * h * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw std::runtime_error(path + ": truncated PGM");
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const size_t k = (static_cast<size_t>(y) * w + x) * bytes;
        const int v = bytes == 1 ? buf[k] : (buf[k] << 8 | buf[k + 1]);
        img(y, x) = static_cast<double>(v) / maxval;
      }
    }
  }
  return img;
}

Eigen::MatrixXd load_png(const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw std::runtime_error(path + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw std::runtime_error(path + ": " + image.message);
  }
  Eigen::MatrixXd img(image.height, image.width);
  for (png_uint_32 y = 0; y < image.height; ++y)
    for (png_uint_32 x = 0; x < image.width; ++x) img(y, x) = buf[y * image.width + x] / 255.0;
  return img;
}

}  // namespace

Eigen::MatrixXd load_grayscale(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("cannot open " + path);
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  probe.close();
  Eigen::MatrixXd img = png_sig_cmp(sig, 0, 8) == 0 ? load_png(path) : load_pgm(path);
  if (img.rows() != img.cols()) throw std::runtime_error(path + ": image is not square");
  return img;
}

}  // namespace edgestream
