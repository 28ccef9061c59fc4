#pragma once

#include <string>
#include <vector>

namespace edgestream {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Self-checks of the numerical core against direct dense computations.
std::vector<Check> run_verification();

}  // namespace edgestream
