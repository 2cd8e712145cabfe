#pragma once

// Shared snapshot builders for the checker and evolver test suites.

#include <cmath>

#include "kslab/radial.hpp"

namespace testsupport {

// Isotropic Gaussian of total mass M and width s on the given grid,
// normalized by quadrature so the discrete mass is exact.
inline kslab::RadialField gaussian_field(const kslab::RadialGrid& grid, double M, double s) {
  kslab::RadialField rho = kslab::make_field(grid);
  for (int i = 0; i < grid.n; ++i) {
    double r = grid.center(i);
    rho.values[i] = std::exp(-r * r / (2.0 * s * s));
  }
  double got = kslab::mass(rho);
  for (int i = 0; i < grid.n; ++i) rho.values[i] *= M / got;
  return rho;
}

}  // namespace testsupport
