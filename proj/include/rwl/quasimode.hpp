#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "rwl/discretize.hpp"
#include "rwl/randomness.hpp"
#include "rwl/symbol.hpp"

namespace rwl {

struct BranchValue {
  Complex lambda;
  Complex dxi;  // d lambda / d xi
  Complex dx;   // d lambda / d x
  Eigen::VectorXcd right;
};

/// A simple eigenvalue of p(x, xi), followed by continuity from a root of q_z.
class EigenBranch {
 public:
  EigenBranch(std::shared_ptr<const MatrixSymbol> s, Complex z, PhaseSpacePoint root, double gap);

  /// Eigenvalue of p(x, xi) closest to guess, with derivatives from left/right eigenvectors.
  BranchValue eval(double x, Complex xi, Complex guess) const;

  const MatrixSymbol& symbol() const { return *symbol_; }
  Complex z() const { return z_; }
  PhaseSpacePoint root() const { return root_; }
  double gap() const { return gap_; }

 private:
  std::shared_ptr<const MatrixSymbol> symbol_;
  Complex z_;
  PhaseSpacePoint root_;
  double gap_;
};

/// Throws MultipleEigenvalue if the eigenvalue at the root is within gap_tol of another one.
EigenBranch locate_branch(const MatrixSymbol& s, Complex z, PhaseSpacePoint root, double gap_tol = 1e-8);

struct EikonalOptions {
  double step = 1e-3;
  double newton_tol = 1e-12;
  int max_iter = 50;
  double step_cap_factor = 10;
  bool stop_at_imag_max = true;  // end each side where Im phi stops increasing
};

/// xi(x) with lambda(x, xi(x)) = z and phi(x) = int_{x0}^x xi, on x0 + j * step, j = -left..right.
struct Phase {
  double x0 = 0;
  double step = 0;
  int left = 0, right = 0;
  std::vector<Complex> xi, phi, dxi_lambda;
  std::vector<Eigen::VectorXcd> eigvec;

  size_t slot(int j) const { return static_cast<size_t>(j + left); }
  double left_radius() const { return left * step; }
  double right_radius() const { return right * step; }
  /// Cubic Hermite interpolation of phi (phi' = xi) at x0 + offset.
  Complex phi_at(double offset) const;
  Complex xi_at(double offset) const;
};

/// Continues the branch outward up to the requested radii, shrinking each side at a branch
/// jump or Newton failure. Throws BranchLoss if a side keeps fewer than 8 steps.
Phase solve_eikonal(const EigenBranch& b, double left_radius, double right_radius, const EikonalOptions& opts = {});

/// a0 = (d_xi lambda(root) / d_xi lambda(x, xi(x)))^{1/2} times the eigenvector field; one column per node.
Eigen::MatrixXcd leading_amplitude(const EigenBranch& b, const Phase& phase);

struct CutoffOptions {
  std::optional<double> support_radius;  // default: largest symmetric radius reached by the phase
  std::optional<double> max_radius;      // default: half the distance to the nearest other root base point
  double plateau_fraction = 0.5;
  double min_edge_imag = 1e-2;  // Im phi required at the support edge
  EikonalOptions eikonal;
};

struct Quasimode {
  Complex z;
  PhaseSpacePoint root;
  double h;
  double plateau_radius, support_radius;
  double edge_imag;  // min Im phi at the support edge
  Eigen::MatrixXcd samples;  // n x N values at x_j = 2 pi j / N, unit L^2 norm

  int grid_size() const { return static_cast<int>(samples.cols()); }
};

/// WKB state chi(x) a0(x) e^{i phi(x)/h} at a plus-root of q_z; sampled on N points.
Quasimode build_quasimode(const MatrixSymbol& s, Complex z, PhaseSpacePoint root, double h, int grid_size,
                          const CutoffOptions& opts = {});

/// Coefficients <q, e_k>, e_k = e^{ikx}/sqrt(2 pi), in the truncation's component-major layout.
Eigen::VectorXcd fourier_coefficients(const Quasimode& q, const FourierTruncation& trunc);

/// ||M c|| / ||c|| for the projected coefficients c.
double residual(const OperatorMatrix& m, const Quasimode& q);

/// <e_k (hD)^alpha e_plus^j, e_minus^i> for k = -k_max..k_max.
std::vector<Complex> overlap_coefficients(const Quasimode& e_plus, const Quasimode& e_minus, int alpha, int i, int j,
                                          int k_max);

Complex overlap_coefficient(const Quasimode& e_plus, const Quasimode& e_minus, int alpha, int i, int j, int k);

/// sum sigma^2 |overlap|^2 over the law's index set (|k| <= K_q).
double overlap_variance(const Quasimode& e_plus, const Quasimode& e_minus, const CoefficientLaw& law);

/// <Q_omega e_plus, e_minus> computed on the sample grid from the draw's coefficient functions.
Complex perturbation_pairing(const PerturbationDraw& draw, const Quasimode& e_plus, const Quasimode& e_minus);

}  // namespace rwl
