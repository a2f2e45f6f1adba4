#include <doctest.h>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "fixtures.hpp"
#include "rwl/harness.hpp"
#include "rwl/quasimode.hpp"

using namespace rwl;
using rwl::fixtures::I;

namespace {

const double kPi = std::numbers::pi;

int pow2_at_least(int v) {
  int n = 16;
  while (n < v) n *= 2;
  return n;
}

int truncation_for(const MatrixSymbol& s, Complex z, double h) {
  return static_cast<int>(std::ceil(2 * xi_window(s, std::abs(z)) / h)) + 2 * s.bandwidth();
}

PhaseSpacePoint plus_root(const MatrixSymbol& s, Complex z) {
  const auto plus = find_roots(s, z).plus();
  REQUIRE_FALSE(plus.empty());
  return plus.front().point;
}

Quasimode quasimode_at(const MatrixSymbol& s, Complex z, double h) {
  return build_quasimode(s, z, plus_root(s, z), h, pow2_at_least(8 * truncation_for(s, z, h)));
}

double l2_norm(const Quasimode& q) { return std::sqrt(kTwoPi / q.grid_size() * q.samples.squaredNorm()); }

double residual_at(const MatrixSymbol& s, Complex z, double h) {
  const int K = truncation_for(s, z, h);
  const Quasimode q = build_quasimode(s, z, plus_root(s, z), h, pow2_at_least(8 * K));
  return residual(shifted(assemble_operator(s, {K, s.dim(), h}), z), q);
}

// e_minus: the same construction on the adjoint symbol at the conjugate spectral parameter.
Quasimode minus_quasimode(const MatrixSymbol& s, Complex z, double h, int grid) {
  const MatrixSymbol adj = s.adjoint_principal();
  return build_quasimode(adj, std::conj(z), plus_root(adj, std::conj(z)), h, grid);
}

}  // namespace

TEST_CASE("scalar branches are the symbol itself") {
  const MatrixSymbol f1 = fixtures::f1();
  const EigenBranch b = locate_branch(f1, 0, {0, -1});
  const BranchValue v = b.eval(0.7, Complex(0.2, 0.1), 0);
  CHECK(std::abs(v.lambda - (Complex(0.2, 0.1) + std::polar(1.0, 0.7))) < 1e-14);
  CHECK(std::abs(v.dxi - 1.0) < 1e-14);
  CHECK(std::abs(std::abs(v.right(0)) - 1) < 1e-14);

  const MatrixSymbol f2 = fixtures::f2();
  const EigenBranch b2 = locate_branch(f2, 0.5, {kPi / 2, std::sqrt(1.5)});
  const BranchValue v2 = b2.eval(1.0, 0.3, 0);
  CHECK(std::abs(v2.lambda - (0.09 + I * std::polar(1.0, 1.0))) < 1e-14);
}

TEST_CASE("matrix branch follows the first diagonal entry") {
  const MatrixSymbol f3 = fixtures::f3();
  const EigenBranch b = locate_branch(f3, 0, {kPi, 1});
  CHECK(b.gap() >= 2 - 1e-12);
  for (double x : {kPi - 0.2, kPi, kPi + 0.2}) {
    const BranchValue v = b.eval(x, 1.0, 1.0 + std::polar(1.0, x));
    CHECK(std::abs(v.lambda - (1.0 + std::polar(1.0, x))) < 1e-12);
  }
}

TEST_CASE("a double eigenvalue is rejected") {
  const MatrixSymbol jordan = MatrixSymbol::from_entries(2, 1, {{1, 0, 0, 0, 1}, {1, 1, 1, 0, 1}, {0, 0, 1, 0, 1}});
  try {
    locate_branch(jordan, 0, {1.0, 0});
    FAIL("expected MultipleEigenvalue");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MultipleEigenvalue);
  }
}

TEST_CASE("F1 eikonal solution in closed form") {
  const EigenBranch b = locate_branch(fixtures::f1(), 0, {kPi, 1});
  const Phase p = solve_eikonal(b, 1.0, 1.0);
  CHECK(std::abs(p.phi[p.slot(0)]) < 1e-12);
  CHECK(std::abs(p.xi[p.slot(0)] - 1.0) < 1e-10);
  for (int j = -p.left; j <= p.right; ++j) {
    const double x = kPi + j * p.step;
    CHECK(std::abs(p.xi[p.slot(j)] + std::polar(1.0, x)) < 1e-10);
    CHECK(std::abs(p.phi[p.slot(j)] - I * (std::polar(1.0, x) + 1.0)) < 1e-9);
    CHECK(p.phi[p.slot(j)].imag() >= -1e-12);
  }
  // phi'' = -i e^{ix} = i at pi
  const double d = p.step;
  const Complex second = (p.xi[p.slot(1)] - p.xi[p.slot(-1)]) / (2 * d);
  CHECK(second.imag() == doctest::Approx(1).epsilon(1e-5));
}

TEST_CASE("F2 eikonal curvature at the plus-root") {
  const EigenBranch b = locate_branch(fixtures::f2(), 0.5, {kPi / 2, std::sqrt(1.5)});
  const Phase p = solve_eikonal(b, 0.5, 0.5);
  const Complex second = (p.xi[p.slot(1)] - p.xi[p.slot(-1)]) / (2 * p.step);
  CHECK(second.imag() == doctest::Approx(1 / (2 * std::sqrt(1.5))).epsilon(1e-5));
  CHECK(second.imag() > 0);
}

TEST_CASE("eikonal residual and phase positivity on all fixtures") {
  struct Case {
    MatrixSymbol s;
    Complex z;
  };
  const Case cases[] = {{fixtures::f1(), 0.0},
                        {fixtures::f1(), Complex(0.3, -0.4)},
                        {fixtures::f2(), 0.5},
                        {fixtures::f2(), Complex(0.2, 0.3)},
                        {fixtures::f3(), 0.0}};
  for (const auto& c : cases) {
    for (const auto& r : find_roots(c.s, c.z).plus()) {
      const EigenBranch b = locate_branch(c.s, c.z, r.point);
      const Phase p = solve_eikonal(b, 0.8, 0.8);
      CHECK(std::abs(p.phi[p.slot(0)]) < 1e-10);
      CHECK(std::abs(p.xi[p.slot(0)] - r.point.xi) < 1e-10);
      Complex guess = c.z;
      for (int j = -p.left; j <= p.right; ++j) {
        const BranchValue v = b.eval(p.x0 + j * p.step, p.xi[p.slot(j)], guess);
        CHECK(std::abs(v.lambda - c.z) < 1e-8);
        CHECK(p.phi[p.slot(j)].imag() >= -1e-12);
        guess = v.lambda;
      }
    }
  }
}

TEST_CASE("leading amplitudes") {
  {
    const EigenBranch b = locate_branch(fixtures::f1(), 0, {kPi, 1});
    const Phase p = solve_eikonal(b, 0.5, 0.5);
    const Eigen::MatrixXcd a = leading_amplitude(b, p);
    for (Eigen::Index j = 0; j < a.cols(); ++j) CHECK(std::abs(std::abs(a(0, j)) - 1) < 1e-12);
  }
  {
    const double xi0 = std::sqrt(1.5);
    const EigenBranch b = locate_branch(fixtures::f2(), 0.5, {kPi / 2, xi0});
    const Phase p = solve_eikonal(b, 0.5, 0.5);
    const Eigen::MatrixXcd a = leading_amplitude(b, p);
    CHECK(std::abs(a(0, p.slot(0)) - 1.0) < 1e-12);
    for (int j = -p.left; j <= p.right; j += 50)
      CHECK(std::abs(a(0, p.slot(j)) - std::sqrt(xi0 / p.xi[p.slot(j)])) < 1e-8);
  }
}

TEST_CASE("quasimode normalization, peak and cutoff") {
  const MatrixSymbol f2 = fixtures::f2();
  const Complex z = 0.5;
  const double h = 0.05;
  const Quasimode q = quasimode_at(f2, z, h);
  CHECK(l2_norm(q) == doctest::Approx(1).epsilon(1e-10));
  Eigen::Index peak;
  q.samples.row(0).cwiseAbs().maxCoeff(&peak);
  const double step = kTwoPi / q.grid_size();
  CHECK(std::abs(circle_offset(peak * step, q.root.x)) <= step * (1 + 1e-9));
  double outside = 0;
  for (int j = 0; j < q.grid_size(); ++j)
    if (std::abs(circle_offset(j * step, q.root.x)) > q.support_radius) outside += std::norm(q.samples(0, j));
  CHECK(std::sqrt(outside * step) < 1e-8);
  CHECK(q.edge_imag > 0);
}

TEST_CASE("quasimode frequencies concentrate near xi / h") {
  const MatrixSymbol f2 = fixtures::f2();
  for (double h : {0.1, 0.05}) {
    const Quasimode q = quasimode_at(f2, 0.5, h);
    const int N = q.grid_size();
    Eigen::FFT<double> fft;
    std::vector<Complex> in(q.samples.row(0).data(), q.samples.row(0).data() + N), out;
    fft.fwd(out, in);
    const double center = q.root.xi / h, width = 3 / std::sqrt(h);
    double inside = 0, total = 0;
    for (int j = 0; j < N; ++j) {
      const int k = j <= N / 2 ? j : j - N;
      total += std::norm(out[static_cast<size_t>(j)]);
      if (std::abs(k - center) <= width) inside += std::norm(out[static_cast<size_t>(j)]);
    }
    CHECK(inside / total >= 0.99);
  }
}

TEST_CASE("an over-wide cutoff is rejected") {
  CutoffOptions opts;
  opts.support_radius = 0.01;
  opts.min_edge_imag = 1.0;
  try {
    build_quasimode(fixtures::f1(), 0, {kPi, 1}, 0.1, 512, opts);
    FAIL("expected CutoffTooWide");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CutoffTooWide);
  }
}

TEST_CASE("residuals") {
  CHECK(residual_at(fixtures::f1(), 0, 0.1) < 0.2);
  for (const MatrixSymbol& s : {fixtures::f1(), fixtures::f2()}) {
    const Complex z = s.order() == 1 ? Complex(0) : Complex(0.5);
    const double r1 = residual_at(s, z, 0.1), r2 = residual_at(s, z, 0.05), r3 = residual_at(s, z, 0.025);
    CHECK(r1 / r2 >= 1.8);
    CHECK(r2 / r3 >= 1.8);
  }
}

TEST_CASE("residual decay slope on five h values") {
  std::vector<double> hs;
  for (int i = 0; i < 5; ++i) hs.push_back(0.1 * std::pow(0.25, i / 4.0));
  for (const MatrixSymbol& s : {fixtures::f1(), fixtures::f2()}) {
    const Complex z = s.order() == 1 ? Complex(0.1, 0.2) : Complex(0.4, 0.1);
    std::vector<std::pair<double, double>> plus, minus;
    for (double h : hs) {
      const int K = truncation_for(s, z, h), grid = pow2_at_least(8 * K);
      plus.emplace_back(h, residual_at(s, z, h));
      const Quasimode em = minus_quasimode(s, z, h, grid);
      const OperatorMatrix adj{shifted(assemble_operator(s, {K, 1, h}), z).entries.adjoint(), {K, 1, h}};
      minus.emplace_back(h, residual(adj, em));
    }
    CHECK(fit_power_law(plus).slope >= 0.9);
    CHECK(fit_power_law(minus).slope >= 0.9);
  }
}

TEST_CASE("plane waves are exact eigenfunctions of hD") {
  const MatrixSymbol xi = MatrixSymbol::from_entries(1, 1, {{1, 0, 0, 0, 1}});
  const double h = 0.1;
  const int K = 10, N = 128, k = 3;
  Quasimode q{h * k, {0, h * k}, h, 0, 0, 0, Eigen::MatrixXcd(1, N)};
  for (int j = 0; j < N; ++j) q.samples(0, j) = std::polar(1.0, k * kTwoPi * j / N) / std::sqrt(kTwoPi);
  CHECK(residual(shifted(assemble_operator(xi, {K, 1, h}), h * k), q) < 1e-14);
  CHECK(residual(shifted(assemble_operator(xi, {K, 1, h}), h * k + 0.01), q) == doctest::Approx(0.01));
}

TEST_CASE("overlap coefficients") {
  const MatrixSymbol f2 = fixtures::f2();
  const double h = 0.05;
  const int grid = 2048;
  const Quasimode ep = build_quasimode(f2, 0.5, plus_root(f2, 0.5), h, grid);
  CHECK(std::abs(overlap_coefficient(ep, ep, 0, 0, 0, 0) - 1 / std::sqrt(kTwoPi)) < 1e-10);

  const Quasimode em = minus_quasimode(f2, 0.5, h, grid);
  // e_k e_plus conj(e_minus) oscillates like e^{i(k + (xi_plus - xi_minus)/h)x}
  const int resonant = -static_cast<int>(std::lround(2 * std::sqrt(1.5) / h));
  const std::vector<Complex> profile = overlap_coefficients(ep, em, 0, 0, 0, 400);
  double peak = 0;
  for (int k = resonant - 3; k <= resonant + 3; ++k) peak = std::max(peak, std::abs(profile[size_t(k + 400)]));
  CHECK(peak > 1e-3);
  CHECK(peak <= 1 / std::sqrt(kTwoPi) + 1e-12);
  CHECK(std::abs(profile[400]) < 1e-6);
  CHECK(std::abs(profile[size_t(400 + 4 * resonant)]) < 1e-6);
  CHECK(std::abs(profile[size_t(400 - resonant)]) < 1e-6);

  // 99% of the l2 mass in a window 1/(Ch) <= |k| <= C/h
  double total = 0;
  for (const Complex& c : profile) total += std::norm(c);
  const double C = 4;
  double inside = 0;
  for (int k = -400; k <= 400; ++k)
    if (std::abs(k) >= 1 / (C * h) && std::abs(k) <= C / h) inside += std::norm(profile[size_t(k + 400)]);
  CHECK(inside / total >= 0.99);
}

TEST_CASE("overlap variance of a zero law vanishes") {
  const MatrixSymbol f2 = fixtures::f2();
  const Quasimode ep = build_quasimode(f2, 0.5, plus_root(f2, 0.5), 0.1, 1024);
  const Quasimode em = minus_quasimode(f2, 0.5, 0.1, 1024);
  const CoefficientLaw zero(0, 0, 1, 1.2, 1, 50, [](int, int, int, int, double) { return 0.0; }, false);
  CHECK(overlap_variance(ep, em, zero) == 0);
  const CoefficientLaw law(0, 0, 1, 1.2, 1, 50);
  CHECK(overlap_variance(ep, em, law) > 0);
  CHECK(perturbation_pairing(PerturbationDraw::zeros(0, 0, 1, 50), ep, em) == Complex(0));
}
