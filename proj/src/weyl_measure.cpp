#include "rwl/weyl_measure.hpp"

#include <cmath>

#include "rwl/linalg.hpp"

namespace rwl {

namespace {

constexpr int kRefine = 8;

// Number of eigenvalues of p(x, xi) in the domain.
class CellCounter {
 public:
  CellCounter(const MatrixSymbol& s, const SpectralDomain& gamma) : s_(s), gamma_(gamma) {}

  void set_x(double x) {
    a_.resize(static_cast<size_t>(s_.order() + 1));
    for (int k = 0; k <= s_.order(); ++k) a_[static_cast<size_t>(k)] = s_.coefficient_matrix(k, x);
  }

  int operator()(double xi) const {
    const int m = s_.order();
    if (s_.dim() == 1) {
      Complex p = a_[static_cast<size_t>(m)](0, 0);
      for (int k = m - 1; k >= 0; --k) p = p * xi + a_[static_cast<size_t>(k)](0, 0);
      return contains(gamma_, p) ? 1 : 0;
    }
    Eigen::MatrixXcd p = a_[static_cast<size_t>(m)];
    for (int k = m - 1; k >= 0; --k) p = p * xi + a_[static_cast<size_t>(k)];
    if (s_.dim() == 2) {
      const Complex tr = p.trace(), det = p(0, 0) * p(1, 1) - p(0, 1) * p(1, 0);
      const Complex disc = std::sqrt(tr * tr / 4.0 - det);
      return (contains(gamma_, tr / 2.0 + disc) ? 1 : 0) + (contains(gamma_, tr / 2.0 - disc) ? 1 : 0);
    }
    const Eigen::VectorXcd ev = eigenvalues(p);
    int c = 0;
    for (Eigen::Index e = 0; e < ev.size(); ++e) c += contains(gamma_, ev(e)) ? 1 : 0;
    return c;
  }

 private:
  const MatrixSymbol& s_;
  const SpectralDomain& gamma_;
  std::vector<Eigen::MatrixXcd> a_;
};

}  // namespace

// Midpoint counts per cell; cells whose count differs from a neighbour are resampled on a finer subgrid.
double weyl_measure_on_grid(const MatrixSymbol& s, const SpectralDomain& gamma, int grid, double xi_window) {
  const double hx = kTwoPi / grid, hxi = 2 * xi_window / grid;
  CellCounter counter(s, gamma);
  auto row = [&](int i) {
    std::vector<int> r(static_cast<size_t>(grid));
    counter.set_x((((i % grid) + grid) % grid + 0.5) * hx);
    for (int j = 0; j < grid; ++j) r[static_cast<size_t>(j)] = counter(-xi_window + (j + 0.5) * hxi);
    return r;
  };
  const std::vector<int> first = row(0);
  std::vector<int> prev = row(grid - 1), cur = first;
  double total = 0;
  for (int i = 0; i < grid; ++i) {
    const std::vector<int> next = i + 1 < grid ? row(i + 1) : first;
    for (int j = 0; j < grid; ++j) {
      const int c = cur[static_cast<size_t>(j)];
      const bool edge = prev[static_cast<size_t>(j)] != c || next[static_cast<size_t>(j)] != c ||
                        (j > 0 && cur[static_cast<size_t>(j - 1)] != c) ||
                        (j + 1 < grid && cur[static_cast<size_t>(j + 1)] != c);
      if (!edge) {
        total += c;
        continue;
      }
      long long sub = 0;
      for (int a = 0; a < kRefine; ++a) {
        counter.set_x(i * hx + (a + 0.5) * hx / kRefine);
        for (int b = 0; b < kRefine; ++b) sub += counter(-xi_window + j * hxi + (b + 0.5) * hxi / kRefine);
      }
      total += static_cast<double>(sub) / (kRefine * kRefine);
    }
    prev = std::move(cur);
    cur = next;
  }
  return total * hx * hxi;
}

WeylMeasure weyl_measure(const MatrixSymbol& s, const SpectralDomain& gamma, const WeylQuadratureOptions& opts) {
  const double window = xi_window(s, sup_modulus(gamma));
  int grid = opts.initial_grid;
  double prev = weyl_measure_on_grid(s, gamma, grid, window);
  for (int d = 0; d < opts.max_doublings; ++d) {
    grid *= 2;
    const double next = weyl_measure_on_grid(s, gamma, grid, window);
    const double delta = std::abs(next - prev);
    if (delta <= std::max(opts.tol_abs, opts.tol_rel * std::abs(next))) return {next, delta, grid, window};
    prev = next;
  }
  throw Error(Errc::NoConvergence, "Weyl measure did not converge after grid doublings");
}

}  // namespace rwl
