#pragma once

#include <Eigen/Dense>

namespace edgestream {

// Uniform periodic grid on [-pi, pi) with an even number of points.
struct Grid1D {
  int n = 0;
  Eigen::VectorXd points;

  static Grid1D make(int n);

  double spacing() const;
  // Index of the grid point nearest to x; halfway ties go to the lower index.
  int nearest(double x) const;
};

// Signed Fourier mode stored at position k of a centred array of length n.
inline int mode_of(int k, int n) { return k - n / 2; }
inline int slot_of(int l, int n) { return l + n / 2; }

}  // namespace edgestream
