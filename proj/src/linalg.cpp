#include "rwl/linalg.hpp"

#include <algorithm>

namespace rwl {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Config: return "ConfigError";
    case Errc::Io: return "IoError";
    case Errc::HypothesisViolation: return "HypothesisViolation";
    case Errc::WindowViolation: return "WindowViolation";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::BoundViolation: return "BoundViolation";
    case Errc::BandwidthExceeded: return "BandwidthExceeded";
    case Errc::NonPositiveLambda: return "NonPositiveLambda";
    case Errc::LambdaBelowOne: return "LambdaBelowOne";
    case Errc::MultipleEigenvalue: return "MultipleEigenvalue";
    case Errc::CutoffTooWide: return "CutoffTooWide";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::ZeroOnContour: return "ZeroOnContour";
    case Errc::BranchLoss: return "BranchLoss";
    case Errc::DegenerateFit: return "DegenerateFit";
  }
  return "Error";
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::NonConvergence:
    case Errc::NoConvergence:
    case Errc::ZeroOnContour:
    case Errc::BranchLoss:
    case Errc::DegenerateFit:
      return 3;
    default:
      return 2;
  }
}

void sort_spectrum(std::vector<Complex>& values) { std::sort(values.begin(), values.end(), spectrum_less); }

Eigen::VectorXcd sorted(const Eigen::VectorXcd& values) {
  std::vector<Complex> v(values.data(), values.data() + values.size());
  sort_spectrum(v);
  return Eigen::Map<Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd balance(Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  constexpr double radix = 2.0, radix2 = 4.0;
  bool again = true;
  int sweeps = 0;
  while (again && sweeps++ < 100) {
    again = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = a.col(i).cwiseAbs().sum() - std::abs(a(i, i));
      double r = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
      if (c == 0 || r == 0) continue;
      const double s = c + r;
      double f = 1;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= radix2;
      }
      g = r * radix;
      while (c >= g) {
        f /= radix;
        c /= radix2;
      }
      if ((c + r) / f < 0.95 * s) {
        d(i) *= f;
        a.row(i) /= f;
        a.col(i) *= f;
        again = true;
      }
    }
  }
  return d;
}

namespace {

bool strictly_upper_zero(const Eigen::MatrixXcd& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (a(i, j) != Complex(0)) return false;
  return true;
}

bool strictly_lower_zero(const Eigen::MatrixXcd& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = j + 1; i < a.rows(); ++i)
      if (a(i, j) != Complex(0)) return false;
  return true;
}

}  // namespace

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw Error(Errc::InvalidArgument, "eigenvalues of a non-square matrix");
  if (a.rows() == 0) return {};
  if (strictly_upper_zero(a) || strictly_lower_zero(a)) return sorted(a.diagonal());
  Eigen::MatrixXcd b = a;
  balance(b);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(b, false);
  if (solver.info() != Eigen::Success) throw Error(Errc::NoConvergence, "complex Schur iteration did not converge");
  return sorted(solver.eigenvalues());
}

EigenPairs eigen_pairs(const Eigen::MatrixXcd& a) {
  Eigen::MatrixXcd b = a;
  const Eigen::VectorXd d = balance(b);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(b, true);
  if (solver.info() != Eigen::Success) throw Error(Errc::NoConvergence, "complex Schur iteration did not converge");
  EigenPairs out{solver.eigenvalues(), d.asDiagonal() * solver.eigenvectors()};
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) out.vectors.col(j).normalize();
  return out;
}

Eigen::MatrixXcd adjugate(const Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  if (n == 1) return Eigen::MatrixXcd::Ones(1, 1);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::VectorXcd adj_s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double prod = 1;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) prod *= s(j);
    adj_s(i) = prod;
  }
  const Complex du = svd.matrixU().determinant();
  const Complex dv = svd.matrixV().determinant();
  return du * std::conj(dv) * svd.matrixV() * adj_s.asDiagonal() * svd.matrixU().adjoint();
}

}  // namespace rwl
