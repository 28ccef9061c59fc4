#include "edgestream/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace edgestream {

Grid1D Grid1D::make(int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("grid size must be even and at least 2");
  Grid1D g;
  g.n = n;
  g.points.resize(n);
  for (int i = 0; i < n; ++i) g.points[i] = -std::numbers::pi + 2.0 * std::numbers::pi * i / n;
  return g;
}

double Grid1D::spacing() const { return 2.0 * std::numbers::pi / n; }

int Grid1D::nearest(double x) const {
  const double t = (x + std::numbers::pi) / spacing();
  int i = static_cast<int>(std::ceil(t - 0.5));
  i %= n;
  if (i < 0) i += n;
  return i;
}

}  // namespace edgestream
