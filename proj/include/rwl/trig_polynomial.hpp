#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

namespace rwl {

/// Finite Fourier series sum_{|j|<=J} c_j e^{ijx} on the circle.
template <typename Real>
class TrigPolynomial {
 public:
  using Scalar = std::complex<Real>;

  TrigPolynomial() : coeffs_(1, Scalar(0)) {}
  explicit TrigPolynomial(int bandwidth) : coeffs_(2 * bandwidth + 1, Scalar(0)) {}

  static TrigPolynomial constant(Scalar c) {
    TrigPolynomial p;
    p.coeffs_[0] = c;
    return p;
  }

  static TrigPolynomial monomial(int j, Scalar c) {
    TrigPolynomial p(std::abs(j));
    p.set_coefficient(j, c);
    return p;
  }

  int bandwidth() const { return static_cast<int>(coeffs_.size() / 2); }

  Scalar coefficient(int j) const {
    const int J = bandwidth();
    return std::abs(j) > J ? Scalar(0) : coeffs_[j + J];
  }

  void set_coefficient(int j, Scalar c) {
    grow(std::abs(j));
    coeffs_[j + bandwidth()] = c;
  }

  void add_coefficient(int j, Scalar c) {
    grow(std::abs(j));
    coeffs_[j + bandwidth()] += c;
  }

  Scalar operator()(Real x) const {
    const int J = bandwidth();
    Scalar acc = coeffs_[J];
    for (int j = 1; j <= J; ++j) {
      const Scalar w = std::polar(Real(1), j * x);
      acc += coeffs_[J + j] * w + coeffs_[J - j] * std::conj(w);
    }
    return acc;
  }

  TrigPolynomial derivative() const {
    TrigPolynomial d(bandwidth());
    for (int j = -bandwidth(); j <= bandwidth(); ++j)
      d.set_coefficient(j, Scalar(0, Real(j)) * coefficient(j));
    return d;
  }

  /// Pointwise complex conjugate: c_j -> conj(c_{-j}).
  TrigPolynomial conjugate() const {
    TrigPolynomial c(bandwidth());
    for (int j = -bandwidth(); j <= bandwidth(); ++j) c.set_coefficient(j, std::conj(coefficient(-j)));
    return c;
  }

  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Scalar& c) { return c == Scalar(0); });
  }

  /// sum |c_j|, an upper bound for the sup norm.
  Real abs_sum() const {
    Real s = 0;
    for (const auto& c : coeffs_) s += std::abs(c);
    return s;
  }

  /// Bandwidth after discarding exactly-zero outer coefficients.
  int effective_bandwidth() const {
    for (int j = bandwidth(); j > 0; --j)
      if (coefficient(j) != Scalar(0) || coefficient(-j) != Scalar(0)) return j;
    return 0;
  }

  TrigPolynomial& operator+=(const TrigPolynomial& o) {
    for (int j = -o.bandwidth(); j <= o.bandwidth(); ++j) add_coefficient(j, o.coefficient(j));
    return *this;
  }

  TrigPolynomial& operator*=(Scalar s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  friend TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) { return a += b; }
  friend TrigPolynomial operator*(TrigPolynomial a, Scalar s) { return a *= s; }
  friend TrigPolynomial operator*(Scalar s, TrigPolynomial a) { return a *= s; }

  friend bool operator==(const TrigPolynomial& a, const TrigPolynomial& b) {
    const int J = std::max(a.bandwidth(), b.bandwidth());
    for (int j = -J; j <= J; ++j)
      if (a.coefficient(j) != b.coefficient(j)) return false;
    return true;
  }

 private:
  void grow(int J) {
    const int old = bandwidth();
    if (J <= old) return;
    std::vector<Scalar> next(2 * J + 1, Scalar(0));
    for (int j = -old; j <= old; ++j) next[j + J] = coeffs_[j + old];
    coeffs_.swap(next);
  }

  std::vector<Scalar> coeffs_;  // index j + J
};

using TrigPoly = TrigPolynomial<double>;

}  // namespace rwl
