#pragma once

#include <vector>

#include "rwl/core.hpp"

namespace rwl {

/// Ordering used for every reported spectrum: by real part, then imaginary part.
inline bool spectrum_less(Complex a, Complex b) {
  return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

void sort_spectrum(std::vector<Complex>& values);
Eigen::VectorXcd sorted(const Eigen::VectorXcd& values);

/// Power-of-two diagonal balancing: returns d with diag(d)^{-1} A diag(d) balanced in place.
Eigen::VectorXd balance(Eigen::MatrixXcd& a);

/// Eigenvalues of a dense complex matrix, sorted. Triangular inputs return their diagonal;
/// otherwise balancing followed by a complex Schur decomposition. Throws NoConvergence.
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& a);

struct EigenPairs {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // column j pairs with values(j), unit 2-norm
};

EigenPairs eigen_pairs(const Eigen::MatrixXcd& a);

/// Classical adjugate, robust at singular matrices (via SVD).
Eigen::MatrixXcd adjugate(const Eigen::MatrixXcd& a);

}  // namespace rwl
