#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "edgestream/grid.hpp"

namespace edgestream {

// One smooth piece c0 + c1*s + amp*sin(s + phase) supported on [lo, hi).
struct Piece {
  double lo = 0, hi = 0;
  double c0 = 0, c1 = 0, amp = 0, phase = 0;

  double value(double s) const;
};

struct Jump {
  double location = 0;
  double value = 0;
};
using JumpList = std::vector<Jump>;

struct PiecewiseSignal {
  std::vector<Piece> pieces;

  double operator()(double s) const;
  double right_limit(double s) const;
  double left_limit(double s) const;
  Eigen::VectorXd sample(const Grid1D& grid) const;
  JumpList jumps() const;
};

Eigen::VectorXd jump_oracle(const PiecewiseSignal& signal, const Grid1D& grid);

// Frame j (counted from 1) of the moving-plateau test signal.
PiecewiseSignal example_signal(int j);

enum class ShapeKind { Ellipse, Rectangle };

// Shapes are given in pixel coordinates; x is the column and y the row.
// Frame j (counted from 1) uses centre (cx + j*vx, cy + j*vy) and angle rot + j*spin.
struct Shape {
  ShapeKind kind = ShapeKind::Ellipse;
  double cx = 0, cy = 0;
  double ax = 1, ay = 1;
  double rot = 0;
  double magnitude = 1;
  double vx = 0, vy = 0, spin = 0;

  bool moving() const { return vx != 0 || vy != 0 || spin != 0; }
};

struct PhantomSpec {
  int n = 64;
  int J = 4;
  // Empty means the built-in piecewise-constant base.
  Eigen::MatrixXd base;
  std::vector<Shape> shapes;
};

struct SceneSequence {
  int dims = 1;
  int n = 0;
  int J = 0;
  std::string kind;
  // 1D frames are n x 1 columns; 2D frames are n x n with rows indexing y.
  std::vector<Eigen::MatrixXd> frames;
  // 1D: grid jump vectors. 2D: edge magnitude maps.
  std::vector<Eigen::MatrixXd> edges;
  std::vector<JumpList> jumps;
  std::vector<PiecewiseSignal> signals;
  // Edge pixels contributed by moving shapes only (2D).
  std::vector<Eigen::MatrixXd> moving_edges;
};

SceneSequence make_example_sequence(int J, int n);

Eigen::MatrixXd builtin_base(int n);
void paint(Eigen::MatrixXd& image, const Shape& shape, int j);
Eigen::MatrixXd edge_mask_2d(const Eigen::MatrixXd& frame);
SceneSequence make_phantom_sequence_2d(const PhantomSpec& spec);

// The desk-scale scene with two translating vehicles and a static building.
PhantomSpec default_scene_spec(int n = 64, int J = 4);
// Two translating and rotating ellipses over the built-in base.
PhantomSpec mri_style_spec(int n = 64, int J = 6);

PhantomSpec phantom_spec_from_json(const nlohmann::json& doc);
SceneSequence scene_from_json(const nlohmann::json& doc);

Eigen::MatrixXd load_grayscale(const std::string& path);

}  // namespace edgestream
