#pragma once

#include <vector>

#include "rwl/core.hpp"
#include "rwl/domains.hpp"
#include "rwl/trig_polynomial.hpp"

namespace rwl {

/// One coefficient entry: A_alpha^{ij} gets value * e^{ikx}.
struct SymbolEntry {
  int alpha, i, j, k;
  Complex value;
};

/// p(x, xi) = sum_{alpha<=m} A_alpha(x) xi^alpha with n x n trigonometric-polynomial coefficients.
class MatrixSymbol {
 public:
  /// coeffs[alpha][i * n + j]. Throws HypothesisViolation if the top coefficient is not
  /// uniformly invertible.
  MatrixSymbol(int n, int m, std::vector<std::vector<TrigPoly>> coeffs, bool semiclassical = true);

  static MatrixSymbol from_entries(int n, int m, const std::vector<SymbolEntry>& entries,
                                   bool semiclassical = true);

  int dim() const { return n_; }
  int order() const { return m_; }
  bool semiclassical() const { return semiclassical_; }
  int bandwidth() const { return bandwidth_; }

  const TrigPoly& coefficient(int alpha, int i, int j) const { return coeffs_[alpha][i * n_ + j]; }
  bool has_order(int alpha) const;

  Eigen::MatrixXcd coefficient_matrix(int alpha, double x) const;
  Eigen::MatrixXcd coefficient_matrix_dx(int alpha, double x) const;
  /// Fourier coefficient matrix \hat A_alpha(k).
  Eigen::MatrixXcd fourier_matrix(int alpha, int k) const;

  /// sum_k ||\hat A_alpha(k)||_F, an upper bound for sup_x ||A_alpha(x)||.
  double coefficient_bound(int alpha) const;
  /// min_x sigma_min(A_m(x)) on a 1024-point grid.
  double top_sigma_min() const { return top_sigma_min_; }

  /// Symbol of the pointwise adjoint: A_alpha(x)^* xi^alpha.
  MatrixSymbol adjoint_principal() const;

  std::vector<SymbolEntry> entries() const;

 private:
  int n_, m_;
  bool semiclassical_;
  int bandwidth_ = 0;
  double top_sigma_min_ = 0;
  std::vector<std::vector<TrigPoly>> coeffs_;
};

struct PhaseSpacePoint {
  double x = 0;
  double xi = 0;

  /// Reduces x modulo 2 pi.
  static PhaseSpacePoint make(double x, double xi) { return {wrap_angle(x), xi}; }
};

Eigen::MatrixXcd eval_symbol(const MatrixSymbol& s, PhaseSpacePoint pt);
/// Evaluation at complex frequency, used along complex phases.
Eigen::MatrixXcd eval_symbol(const MatrixSymbol& s, double x, Complex xi);
Eigen::MatrixXcd eval_symbol_dxi(const MatrixSymbol& s, double x, Complex xi);
Eigen::MatrixXcd eval_symbol_dx(const MatrixSymbol& s, double x, Complex xi);

/// Eigenvalues sorted by (Re, Im).
std::vector<Complex> symbol_spectrum(const MatrixSymbol& s, PhaseSpacePoint pt);

/// det(p(x, xi) - z).
Complex qz(const MatrixSymbol& s, PhaseSpacePoint pt, Complex z);

struct QzGradient {
  Complex dx;
  Complex dxi;
};

QzGradient qz_gradient(const MatrixSymbol& s, PhaseSpacePoint pt, Complex z);

/// (1/2i)(d_xi q d_x conj(q) - d_x q d_xi conj(q)); real by construction.
double poisson_bracket_indicator(const MatrixSymbol& s, PhaseSpacePoint pt, Complex z);

/// Radius in xi outside which p(x, xi) - z is invertible for every |z| <= sup_modulus.
double xi_window(const MatrixSymbol& s, double sup_modulus);

enum class RootSign { Plus, Minus };

struct ClassifiedRoot {
  PhaseSpacePoint point;
  RootSign sign;
  double bracket;
  bool degenerate;  // |bracket| below the tangency threshold
};

struct RootInventory {
  Complex z;
  std::vector<ClassifiedRoot> roots;  // sorted by (x, xi)
  int beta = 0;                       // plus-roots
  int gamma = 0;                      // minus-roots
  bool degenerate = false;

  std::vector<ClassifiedRoot> plus() const;
  std::vector<ClassifiedRoot> minus() const;
};

struct RootSearchOptions {
  int grid_x = 256;  // x-columns scanned for sign changes of Im xi(x)
  int max_iter = 100;
  double dedup_radius = 1e-6;
  double eps_phi = 1e-6;
};

RootInventory find_roots(const MatrixSymbol& s, Complex z, const RootSearchOptions& opts = {});

/// Winding number of q_z along a closed polyline in the (x, xi) plane, in traversal order.
/// Throws ZeroOnContour if q_z vanishes on the loop.
int winding_number(const MatrixSymbol& s, Complex z, const std::vector<Eigen::Vector2d>& loop);

std::vector<Eigen::Vector2d> circle_loop(PhaseSpacePoint center, double radius, int points = 64);
std::vector<Eigen::Vector2d> rectangle_loop(double x0, double x1, double xi0, double xi1);

enum class Region { OutsideSigma, InLambda, NearPhi };

struct RegionClass {
  Region region;
  RootInventory inventory;
};

RegionClass classify_region(const MatrixSymbol& s, Complex z, const RootSearchOptions& opts = {});

/// Number of eigenvalues of p(x, xi) in the domain, with multiplicity.
int count_m_gamma(const MatrixSymbol& s, PhaseSpacePoint pt, const SpectralDomain& gamma);

}  // namespace rwl
