#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "edgestream/scene.hpp"

using namespace edgestream;
using std::numbers::pi;

TEST_CASE("grid points start at -pi with spacing 2pi/n") {
  const Grid1D g = Grid1D::make(8);
  CHECK(g.points[0] == doctest::Approx(-pi));
  CHECK(g.points[4] == doctest::Approx(0.0));
  CHECK(g.spacing() == doctest::Approx(pi / 4));
}

TEST_CASE("nearest grid index sends halfway ties to the lower index") {
  const Grid1D g = Grid1D::make(8);
  CHECK(g.nearest(0.0) == 4);
  CHECK(g.nearest(pi / 8) == 4);
  CHECK(g.nearest(pi / 8 + 1e-9) == 5);
  CHECK(g.nearest(pi - 1e-9) == 0);
}

TEST_CASE("example signal jumps equal right minus left limits") {
  const PiecewiseSignal f = example_signal(1);
  const JumpList jumps = f.jumps();
  REQUIRE(jumps.size() == 6);
  CHECK(jumps[0].location == doctest::Approx(-3 * pi / 4 - 0.4));
  CHECK(jumps[0].value == doctest::Approx(1.5));
  CHECK(jumps[1].value == doctest::Approx(-1.5));
  for (const auto& j : jumps)
    CHECK(j.value == doctest::Approx(f.right_limit(j.location) - f.left_limit(j.location)).epsilon(1e-9));
}

TEST_CASE("jump oracle places each jump at its nearest grid point") {
  const Grid1D g = Grid1D::make(128);
  const PiecewiseSignal f = example_signal(2);
  const Eigen::VectorXd x = jump_oracle(f, g);
  CHECK((x.array() != 0).count() == 6);
  for (const auto& j : f.jumps()) CHECK(x[g.nearest(j.location)] == doctest::Approx(j.value));
}

TEST_CASE("jump oracle rejects jumps that share a grid point") {
  PiecewiseSignal f;
  f.pieces = {Piece{0.0, 0.01, 1.0}};
  CHECK_THROWS_AS(jump_oracle(f, Grid1D::make(16)), std::runtime_error);
}

TEST_CASE("example sequence moves only the plateau") {
  const SceneSequence seq = make_example_sequence(3, 128);
  CHECK(seq.frames.size() == 3);
  const Eigen::VectorXd d = seq.edges[1] - seq.edges[0];
  CHECK((d.array() != 0).count() >= 2);
  CHECK((d.array() != 0).count() <= 4);
  CHECK_THROWS_AS(make_example_sequence(0, 128), std::invalid_argument);
  CHECK_THROWS_AS(make_example_sequence(2, 15), std::invalid_argument);
}

TEST_CASE("edge map of a square marks its boundary only") {
  Eigen::MatrixXd img = Eigen::MatrixXd::Zero(16, 16);
  img.block(4, 4, 6, 6).setConstant(2.0);
  const Eigen::MatrixXd e = edge_mask_2d(img);
  CHECK(e(4, 4) == 2.0);
  CHECK(e(3, 5) == 2.0);
  CHECK(e(6, 6) == 0.0);
  CHECK(e(0, 0) == 0.0);
}

TEST_CASE("painting a shape outside the image throws") {
  Eigen::MatrixXd img = Eigen::MatrixXd::Zero(32, 32);
  Shape s;
  s.cx = 30;
  s.cy = 16;
  s.ax = 5;
  s.ay = 5;
  CHECK_THROWS_AS(paint(img, s, 1), std::invalid_argument);
}

TEST_CASE("default scene keeps the static shape and moves the others") {
  const SceneSequence seq = make_phantom_sequence_2d(default_scene_spec(64, 4));
  REQUIRE(seq.J == 4);
  CHECK(seq.frames[0](44, 44) == 1.5);
  CHECK(seq.frames[3](44, 44) == 1.5);
  CHECK((seq.frames[0] - seq.frames[1]).cwiseAbs().maxCoeff() > 0);
  for (int j = 0; j < 4; ++j) {
    CHECK((seq.moving_edges[j].array() > 0).count() > 0);
    CHECK(((seq.moving_edges[j].array() > 0) && (seq.edges[j].array() == 0)).count() == 0);
  }
}

TEST_CASE("scene json selects the kind and rejects unknown ones") {
  CHECK(scene_from_json({{"kind", "example41"}, {"n", 64}, {"J", 2}}).dims == 1);
  CHECK(scene_from_json({{"kind", "phantom2d"}, {"n", 64}, {"J", 2}}).dims == 2);
  CHECK_THROWS_AS(scene_from_json({{"kind", "nope"}}), std::invalid_argument);
}

TEST_CASE("ascii PGM loads scaled to the unit interval") {
  const auto path = std::filesystem::temp_directory_path() / "edgestream_scene_test.pgm";
  {
    std::ofstream out(path);
    out << "P2\n2 2\n255\n0 255\n51 102\n";
  }
  const Eigen::MatrixXd img = load_grayscale(path.string());
  CHECK(img(0, 1) == doctest::Approx(1.0));
  CHECK(img(1, 0) == doctest::Approx(0.2));
  std::filesystem::remove(path);
  CHECK_THROWS(load_grayscale("/nonexistent/image.pgm"));
}

TEST_CASE("16-bit PGM values scale by the declared maximum") {
  const auto path = std::filesystem::temp_directory_path() / "edgestream_scene_16.pgm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n1 1\n65535\n";
    out.put(static_cast<char>(0x80));
    out.put(0);
  }
  CHECK(load_grayscale(path.string())(0, 0) == doctest::Approx(32768.0 / 65535.0).epsilon(1e-12));
  std::filesystem::remove(path);
}
