#pragma once

#include "rwl/domains.hpp"
#include "rwl/symbol.hpp"

namespace rwl {

struct WeylQuadratureOptions {
  int initial_grid = 128;
  int max_doublings = 6;
  double tol_rel = 1e-3;
  double tol_abs = 1e-6;
};

struct WeylMeasure {
  double value;       // integral of m_Gamma over [0, 2 pi] x [-Xi, Xi]
  double last_delta;  // change at the last doubling
  int grid;           // final grid size per axis
  double xi_window;
};

/// Midpoint rule with grid doubling; throws NoConvergence when the doublings run out.
WeylMeasure weyl_measure(const MatrixSymbol& s, const SpectralDomain& gamma, const WeylQuadratureOptions& opts = {});

/// Midpoint sum on one fixed grid.
double weyl_measure_on_grid(const MatrixSymbol& s, const SpectralDomain& gamma, int grid, double xi_window);

}  // namespace rwl
