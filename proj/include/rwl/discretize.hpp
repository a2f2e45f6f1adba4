#pragma once

#include <iosfwd>
#include <vector>

#include "rwl/domains.hpp"
#include "rwl/randomness.hpp"
#include "rwl/symbol.hpp"

namespace rwl {

/// Frequencies k = -K..K for each of n components; index = component * (2K+1) + (k + K).
struct FourierTruncation {
  int K;
  int n;
  double h;

  int modes() const { return 2 * K + 1; }
  int side() const { return n * modes(); }
  int index(int component, int k) const { return component * modes() + (k + K); }
};

enum class MatrixKind { Operator, Perturbation, Combined };

struct OperatorMatrix {
  Eigen::MatrixXcd entries;
  FourierTruncation trunc;
  MatrixKind kind = MatrixKind::Operator;
  double delta = 0;
  /// sum |q| / sqrt(2 pi) of draw coefficients left out because |k| > 2K.
  double dropped_mass = 0;
};

/// w(k) = (sum_{alpha<=m} (hk)^{2 alpha})^{1/2}, the weight of e_k in the semiclassical H^m norm.
class SobolevWeights {
 public:
  SobolevWeights(int m, double h, int K);
  double operator()(int k) const { return w_[static_cast<size_t>(k + K_)]; }
  int order() const { return m_; }

 private:
  int m_, K_;
  std::vector<double> w_;
};

/// Entry ((i,l),(j,k)) = sum_alpha \hat A_alpha^{ij}(l-k) (hk)^alpha. Throws BandwidthExceeded if K < 2J.
OperatorMatrix assemble_operator(const MatrixSymbol& s, const FourierTruncation& trunc);

/// delta * sum_alpha \hat Q_alpha(l-k) (hk)^alpha with \hat Q_alpha(j) = q_{alpha,j} / sqrt(2 pi).
OperatorMatrix assemble_perturbation(const PerturbationDraw& draw, const FourierTruncation& trunc, double delta);

/// P - Q.
OperatorMatrix combine(const OperatorMatrix& p, const OperatorMatrix& q);

/// M - z I.
OperatorMatrix shifted(const OperatorMatrix& m, Complex z);

double operator_norm_hm_to_l2(const OperatorMatrix& m, const SobolevWeights& w);

Eigen::VectorXcd eigenvalues(const OperatorMatrix& m);

int count_eigenvalues(const Eigen::VectorXcd& eigs, const SpectralDomain& gamma);
int count_eigenvalues(const OperatorMatrix& m, const SpectralDomain& gamma);

/// Smallest delta that stays above eigensolver rounding: 1e3 * ulp(1) * ||P||_2.
double delta_floor(const OperatorMatrix& p);

struct TruncationReport {
  std::vector<int> K_values;
  std::vector<int> counts;
  bool stabilized;  // the last two counts agree
};

TruncationReport truncation_convergence(const MatrixSymbol& s, double h, const SpectralDomain& gamma,
                                        const PerturbationDraw& draw, double delta, const std::vector<int>& K_values);

struct ZGrid {
  double re_min, re_max;
  int n_re;
  double im_min, im_max;
  int n_im;

  Complex at(int a, int b) const;
};

/// sigma_min(P_K - z) on the grid; rows index the real part.
Eigen::MatrixXd sigma_min_map(const MatrixSymbol& s, const FourierTruncation& trunc, const ZGrid& grid);

/// Text format: header "side n K h", then one row per line as re im pairs.
void write_matrix(std::ostream& os, const OperatorMatrix& m);
OperatorMatrix read_matrix(std::istream& is);

}  // namespace rwl
