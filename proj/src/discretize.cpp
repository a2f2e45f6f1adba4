#include "rwl/discretize.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "rwl/linalg.hpp"

namespace rwl {

namespace {

double ipow(double x, int a) {
  double r = 1;
  for (int i = 0; i < a; ++i) r *= x;
  return r;
}

double largest_singular_value(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return 0;
  return Eigen::BDCSVD<Eigen::MatrixXcd>(a).singularValues()(0);
}

}  // namespace

SobolevWeights::SobolevWeights(int m, double h, int K) : m_(m), K_(K), w_(static_cast<size_t>(2 * K + 1)) {
  for (int k = -K; k <= K; ++k) {
    double s = 0;
    for (int a = 0; a <= m; ++a) s += ipow(h * k, 2 * a);
    w_[static_cast<size_t>(k + K)] = std::sqrt(s);
  }
}

OperatorMatrix assemble_operator(const MatrixSymbol& s, const FourierTruncation& trunc) {
  const int J = s.bandwidth();
  if (trunc.n != s.dim()) throw Error(Errc::InvalidArgument, "truncation dimension does not match the symbol");
  if (trunc.K < 2 * J || trunc.K < 1)
    throw Error(Errc::BandwidthExceeded, "truncation K=" + std::to_string(trunc.K) + " below twice the bandwidth " +
                                             std::to_string(J));
  const int n = s.dim(), K = trunc.K;
  OperatorMatrix out{Eigen::MatrixXcd::Zero(trunc.side(), trunc.side()), trunc, MatrixKind::Operator, 0, 0};
  for (int a = 0; a <= s.order(); ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const TrigPoly& p = s.coefficient(a, i, j);
        if (p.is_zero()) continue;
        for (int k = -K; k <= K; ++k) {
          const double hk = ipow(trunc.h * k, a);
          for (int d = -p.bandwidth(); d <= p.bandwidth(); ++d) {
            const int l = k + d;
            if (l < -K || l > K || p.coefficient(d) == Complex(0)) continue;
            out.entries(trunc.index(i, l), trunc.index(j, k)) += p.coefficient(d) * hk;
          }
        }
      }
  return out;
}

OperatorMatrix assemble_perturbation(const PerturbationDraw& draw, const FourierTruncation& trunc, double delta) {
  if (trunc.n != draw.n) throw Error(Errc::InvalidArgument, "truncation dimension does not match the draw");
  const int n = draw.n, K = trunc.K;
  const double norm = 1.0 / std::sqrt(kTwoPi);
  OperatorMatrix out{Eigen::MatrixXcd::Zero(trunc.side(), trunc.side()), trunc, MatrixKind::Perturbation, delta, 0};
  const int used = std::min(draw.k_q, 2 * K);
  for (int a = draw.alpha_min; a <= draw.alpha_max; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        for (int d = used + 1; d <= draw.k_q; ++d)
          out.dropped_mass += (std::abs(draw.coefficient(a, i, j, d)) + std::abs(draw.coefficient(a, i, j, -d))) * norm;
        for (int k = -K; k <= K; ++k) {
          const double hk = ipow(trunc.h * k, a);
          for (int l = std::max(-K, k - used); l <= std::min(K, k + used); ++l) {
            const Complex q = draw.coefficient(a, i, j, l - k);
            if (q == Complex(0)) continue;
            out.entries(trunc.index(i, l), trunc.index(j, k)) += q * norm * hk;
          }
        }
      }
  out.entries *= delta;
  return out;
}

OperatorMatrix combine(const OperatorMatrix& p, const OperatorMatrix& q) {
  if (p.entries.rows() != q.entries.rows()) throw Error(Errc::InvalidArgument, "matrix sizes differ");
  OperatorMatrix out = p;
  out.entries -= q.entries;
  out.kind = MatrixKind::Combined;
  out.delta = q.delta;
  out.dropped_mass = q.dropped_mass;
  return out;
}

OperatorMatrix shifted(const OperatorMatrix& m, Complex z) {
  OperatorMatrix out = m;
  out.entries.diagonal().array() -= z;
  return out;
}

double operator_norm_hm_to_l2(const OperatorMatrix& m, const SobolevWeights& w) {
  const FourierTruncation& t = m.trunc;
  Eigen::VectorXd inv(t.side());
  for (int c = 0; c < t.n; ++c)
    for (int k = -t.K; k <= t.K; ++k) inv(t.index(c, k)) = 1.0 / w(k);
  return largest_singular_value(m.entries * inv.asDiagonal());
}

Eigen::VectorXcd eigenvalues(const OperatorMatrix& m) { return eigenvalues(m.entries); }

int count_eigenvalues(const Eigen::VectorXcd& eigs, const SpectralDomain& gamma) {
  int c = 0;
  for (Eigen::Index i = 0; i < eigs.size(); ++i) c += contains(gamma, eigs(i)) ? 1 : 0;
  return c;
}

int count_eigenvalues(const OperatorMatrix& m, const SpectralDomain& gamma) {
  return count_eigenvalues(eigenvalues(m), gamma);
}

double delta_floor(const OperatorMatrix& p) {
  return 1e3 * std::numeric_limits<double>::epsilon() * largest_singular_value(p.entries);
}

TruncationReport truncation_convergence(const MatrixSymbol& s, double h, const SpectralDomain& gamma,
                                        const PerturbationDraw& draw, double delta, const std::vector<int>& K_values) {
  TruncationReport r{K_values, {}, false};
  for (int K : K_values) {
    const FourierTruncation t{K, s.dim(), h};
    const OperatorMatrix m = combine(assemble_operator(s, t), assemble_perturbation(draw, t, delta));
    r.counts.push_back(count_eigenvalues(m, gamma));
  }
  r.stabilized = r.counts.size() >= 2 && r.counts[r.counts.size() - 1] == r.counts[r.counts.size() - 2];
  return r;
}

Complex ZGrid::at(int a, int b) const {
  const double re = n_re == 1 ? re_min : re_min + (re_max - re_min) * a / (n_re - 1);
  const double im = n_im == 1 ? im_min : im_min + (im_max - im_min) * b / (n_im - 1);
  return {re, im};
}

Eigen::MatrixXd sigma_min_map(const MatrixSymbol& s, const FourierTruncation& trunc, const ZGrid& grid) {
  const OperatorMatrix p = assemble_operator(s, trunc);
  Eigen::MatrixXd out(grid.n_re, grid.n_im);
  for (int a = 0; a < grid.n_re; ++a)
    for (int b = 0; b < grid.n_im; ++b) {
      const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXcd>(shifted(p, grid.at(a, b)).entries).singularValues();
      out(a, b) = sv(sv.size() - 1);
    }
  return out;
}

void write_matrix(std::ostream& os, const OperatorMatrix& m) {
  os.precision(17);
  os << m.trunc.side() << ' ' << m.trunc.n << ' ' << m.trunc.K << ' ' << m.trunc.h << '\n';
  for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.entries.cols(); ++j) {
      if (j) os << ' ';
      os << m.entries(i, j).real() << ' ' << m.entries(i, j).imag();
    }
    os << '\n';
  }
}

OperatorMatrix read_matrix(std::istream& is) {
  int side, n, K;
  double h;
  if (!(is >> side >> n >> K >> h)) throw Error(Errc::Io, "malformed matrix header");
  const FourierTruncation t{K, n, h};
  if (t.side() != side) throw Error(Errc::Io, "matrix header is inconsistent");
  OperatorMatrix m{Eigen::MatrixXcd(side, side), t, MatrixKind::Operator, 0, 0};
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      double re, im;
      if (!(is >> re >> im)) throw Error(Errc::Io, "matrix file truncated");
      m.entries(i, j) = {re, im};
    }
  return m;
}

}  // namespace rwl
