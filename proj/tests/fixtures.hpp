#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "rwl/symbol.hpp"

namespace rwl::fixtures {

inline constexpr Complex I{0, 1};

// xi + e^{ix}
inline MatrixSymbol f1() { return MatrixSymbol::from_entries(1, 1, {{0, 0, 0, 1, 1}, {1, 0, 0, 0, 1}}); }

// xi^2 + i e^{ix}
inline MatrixSymbol f2() { return MatrixSymbol::from_entries(1, 2, {{0, 0, 0, 1, I}, {2, 0, 0, 0, 1}}); }

// [[xi + e^{ix}, 1], [0, xi - e^{ix}]]
inline MatrixSymbol f3() {
  return MatrixSymbol::from_entries(
      2, 1, {{0, 0, 0, 1, 1}, {0, 0, 1, 0, 1}, {0, 1, 1, 1, -1}, {1, 0, 0, 0, 1}, {1, 1, 1, 0, 1}});
}

// e^{ix} xi^2, classical
inline MatrixSymbol f4() { return MatrixSymbol::from_entries(1, 2, {{2, 0, 0, 1, 1}}, false); }

struct ExpectedRoot {
  double x, xi;
  bool plus;
};

// q = xi + e^{ix} - z; bracket = -cos x. Defined for |Im z| < 1.
inline std::vector<ExpectedRoot> f1_roots(Complex z) {
  const double a = std::asin(z.imag());
  const double b = std::numbers::pi - a;
  return {{wrap_angle(a), z.real() - std::cos(a), false}, {wrap_angle(b), z.real() - std::cos(b), true}};
}

// q = xi^2 + i e^{ix} - z; t = xi^2 solves |z - t| = 1, e^{ix} = -i (z - t); bracket = 2 xi sin x.
inline std::vector<ExpectedRoot> f2_roots(Complex z) {
  std::vector<ExpectedRoot> out;
  const double disc = 1 - z.imag() * z.imag();
  if (disc <= 0) return out;
  for (double sgn : {-1.0, 1.0}) {
    const double t = z.real() + sgn * std::sqrt(disc);
    if (t <= 0) continue;
    const double x = wrap_angle(std::arg(-I * (z - t)));
    for (double s : {-1.0, 1.0}) {
      const double xi = s * std::sqrt(t);
      out.push_back({x, xi, 2 * xi * std::sin(x) > 0});
    }
  }
  return out;
}

}  // namespace rwl::fixtures
