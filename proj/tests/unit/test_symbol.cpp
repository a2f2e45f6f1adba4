#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "rwl/symbol.hpp"

using namespace rwl;
using rwl::fixtures::I;

namespace {

const double kPi = std::numbers::pi;

MatrixSymbol random_scalar_symbol(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> deg(1, 3), band(1, 3);
  std::normal_distribution<double> g;
  const int m = deg(rng), J = band(rng);
  std::vector<SymbolEntry> entries{{m, 0, 0, 0, 1}};
  entries.push_back({m, 0, 0, J, Complex(0.2 * g(rng), 0.2 * g(rng))});
  for (int a = 0; a < m; ++a)
    for (int k = -J; k <= J; ++k) entries.push_back({a, 0, 0, k, Complex(g(rng), g(rng)) / (1.0 + std::abs(k))});
  return MatrixSymbol::from_entries(1, m, entries);
}

// Durand-Kerner on a monic polynomial c[0] + ... + c[n-1] z^{n-1} + z^n.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& c) {
  const size_t n = c.size();
  std::vector<Complex> r(n);
  for (size_t i = 0; i < n; ++i) r[i] = std::pow(Complex(0.4, 0.9), static_cast<double>(i));
  auto eval = [&](Complex z) {
    Complex acc = 1;
    for (size_t i = n; i-- > 0;) acc = acc * z + c[i];
    return acc;
  };
  for (int it = 0; it < 2000; ++it)
    for (size_t i = 0; i < n; ++i) {
      Complex den = 1;
      for (size_t j = 0; j < n; ++j)
        if (j != i) den *= r[i] - r[j];
      r[i] -= eval(r[i]) / den;
    }
  return r;
}

}  // namespace

TEST_CASE("eval_symbol on fixtures") {
  CHECK(std::abs(eval_symbol(fixtures::f1(), {0, 1})(0, 0) - 2.0) < 1e-15);
  CHECK(std::abs(eval_symbol(fixtures::f1(), {kPi, 1})(0, 0)) < 1e-15);
  Eigen::Matrix2cd want;
  want << 1, 1, 0, -1;
  CHECK((eval_symbol(fixtures::f3(), {0, 0}) - want).norm() < 1e-15);
}

TEST_CASE("symbol construction checks ellipticity") {
  CHECK_THROWS_AS(MatrixSymbol::from_entries(1, 1, {{1, 0, 0, 0, 1}, {1, 0, 0, 1, 1}}), Error);
  CHECK(fixtures::f1().top_sigma_min() == doctest::Approx(1));
  CHECK(fixtures::f4().top_sigma_min() == doctest::Approx(1));
}

TEST_CASE("symbol_spectrum") {
  const auto s1 = symbol_spectrum(fixtures::f1(), {0, 1});
  REQUIRE(s1.size() == 1);
  CHECK(std::abs(s1[0] - 2.0) < 1e-15);
  const auto s3 = symbol_spectrum(fixtures::f3(), {0, 0});
  REQUIRE(s3.size() == 2);
  CHECK(std::abs(s3[0] + 1.0) < 1e-14);
  CHECK(std::abs(s3[1] - 1.0) < 1e-14);
}

TEST_CASE("symbol_spectrum matches characteristic polynomial roots") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    std::vector<SymbolEntry> entries;
    for (int i = 0; i < 3; ++i) {
      entries.push_back({1, i, i, 0, 1});
      for (int j = 0; j < 3; ++j)
        for (int k = -1; k <= 1; ++k) entries.push_back({0, i, j, k, Complex(g(rng), g(rng))});
    }
    const MatrixSymbol s = MatrixSymbol::from_entries(3, 1, entries);
    const PhaseSpacePoint pt{1.3, 0.4};
    const Eigen::Matrix3cd p = eval_symbol(s, pt);
    // det(z - p) = z^3 - tr z^2 + c1 z - det
    const Complex tr = p.trace(), det = p.determinant();
    const Complex c1 = (tr * tr - (p * p).trace()) / 2.0;
    const auto roots = polynomial_roots({-det, c1, -tr});
    for (Complex ev : symbol_spectrum(s, pt)) {
      double best = 1e300;
      for (Complex r : roots) best = std::min(best, std::abs(r - ev));
      CHECK(best < 1e-8);
    }
  }
}

TEST_CASE("qz values") {
  CHECK(std::abs(qz(fixtures::f1(), {0, 1}, 0) - 2.0) < 1e-15);
  CHECK(std::abs(qz(fixtures::f1(), {0, -1}, 0)) < 1e-15);
  CHECK(std::abs(qz(fixtures::f3(), {0, 0}, 1)) < 1e-15);
}

TEST_CASE("qz_gradient on fixtures") {
  const QzGradient g1 = qz_gradient(fixtures::f1(), {0, -1}, 0);
  CHECK(std::abs(g1.dx - I) < 1e-14);
  CHECK(std::abs(g1.dxi - 1.0) < 1e-14);
  CHECK(std::abs(qz_gradient(fixtures::f1(), {2.2, 0.3}, {0.1, 0.4}).dxi - 1.0) < 1e-14);
  const QzGradient g2 = qz_gradient(fixtures::f2(), {kPi / 2, 1}, 0);
  CHECK(std::abs(g2.dx + I) < 1e-14);
  CHECK(std::abs(g2.dxi - 2.0) < 1e-14);
}

TEST_CASE("qz_gradient agrees with central differences") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ux(0, kTwoPi), uxi(-2, 2), uz(-1, 1);
  const MatrixSymbol fixtures_list[] = {fixtures::f1(), fixtures::f2(), fixtures::f3(), fixtures::f4()};
  const double eps = 1e-5;
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    const MatrixSymbol& s = fixtures_list[t % 4];
    const PhaseSpacePoint pt{ux(rng), uxi(rng)};
    const Complex z(uz(rng), uz(rng));
    const QzGradient g = qz_gradient(s, pt, z);
    const Complex fdx = (qz(s, {pt.x + eps, pt.xi}, z) - qz(s, {pt.x - eps, pt.xi}, z)) / (2 * eps);
    const Complex fdxi = (qz(s, {pt.x, pt.xi + eps}, z) - qz(s, {pt.x, pt.xi - eps}, z)) / (2 * eps);
    const double scale = 1 + std::abs(g.dx) + std::abs(g.dxi);
    CHECK(std::abs(g.dx - fdx) < 1e-6 * scale);
    CHECK(std::abs(g.dxi - fdxi) < 1e-6 * scale);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("bracket indicator values") {
  CHECK(poisson_bracket_indicator(fixtures::f1(), {0, -1}, 0) == doctest::Approx(-1).epsilon(1e-12));
  CHECK(std::abs(poisson_bracket_indicator(fixtures::f1(), {kPi / 2, 0.7}, {0.3, 0.2})) < 1e-14);
  CHECK(poisson_bracket_indicator(fixtures::f2(), {kPi / 2, std::sqrt(1.5)}, 0.5) ==
        doctest::Approx(2 * std::sqrt(1.5)).epsilon(1e-12));
  CHECK(poisson_bracket_indicator(fixtures::f4(), {0.5, 1.0}, 0) == doctest::Approx(-2));
}

TEST_CASE("bracket is Im(dxi q conj dx q) and flips under conjugation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0, kTwoPi), uxi(-2, 2), uz(-1, 1);
  for (int t = 0; t < 200; ++t) {
    const MatrixSymbol s = random_scalar_symbol(rng);
    const PhaseSpacePoint pt{ux(rng), uxi(rng)};
    const Complex z(uz(rng), uz(rng));
    const QzGradient g = qz_gradient(s, pt, z);
    const double b = poisson_bracket_indicator(s, pt, z);
    CHECK(b == doctest::Approx(std::imag(g.dxi * std::conj(g.dx))).epsilon(1e-12));
    const double bc = poisson_bracket_indicator(s.adjoint_principal(), pt, std::conj(z));
    CHECK(bc == doctest::Approx(-b).epsilon(1e-10));
  }
}

TEST_CASE("find_roots on F1") {
  const RootInventory inv = find_roots(fixtures::f1(), 0);
  REQUIRE(inv.roots.size() == 2);
  CHECK(inv.beta == 1);
  CHECK(inv.gamma == 1);
  const ClassifiedRoot& minus = inv.roots[0];
  const ClassifiedRoot& plus = inv.roots[1];
  CHECK(std::abs(minus.point.x) < 1e-10);
  CHECK(minus.point.xi == doctest::Approx(-1));
  CHECK(minus.sign == RootSign::Minus);
  CHECK(plus.point.x == doctest::Approx(kPi));
  CHECK(plus.point.xi == doctest::Approx(1));
  CHECK(plus.sign == RootSign::Plus);
  CHECK(find_roots(fixtures::f1(), 2.0 * I).roots.empty());
}

TEST_CASE("find_roots on F2 shares the base point") {
  const RootInventory inv = find_roots(fixtures::f2(), 0.5);
  REQUIRE(inv.roots.size() == 2);
  CHECK(inv.beta == 1);
  CHECK(inv.gamma == 1);
  const auto p = inv.plus(), m = inv.minus();
  REQUIRE(p.size() == 1);
  REQUIRE(m.size() == 1);
  CHECK(p[0].point.x == doctest::Approx(kPi / 2));
  CHECK(p[0].point.xi == doctest::Approx(std::sqrt(1.5)));
  CHECK(m[0].point.x == doctest::Approx(kPi / 2));
  CHECK(m[0].point.xi == doctest::Approx(-std::sqrt(1.5)));
}

TEST_CASE("root completeness on a grid inside Lambda") {
  auto check = [](const MatrixSymbol& s, Complex z, const std::vector<fixtures::ExpectedRoot>& want) {
    const RootInventory inv = find_roots(s, z, {.grid_x = 96});
    REQUIRE(inv.roots.size() == want.size());
    for (const auto& w : want) {
      bool found = false;
      for (const auto& r : inv.roots)
        if (std::abs(circle_offset(r.point.x, w.x)) < 1e-8 && std::abs(r.point.xi - w.xi) < 1e-8) {
          found = true;
          CHECK((r.sign == RootSign::Plus) == w.plus);
        }
      CHECK(found);
    }
  };
  for (int a = 0; a < 20; ++a)
    for (int b = 0; b < 20; ++b) {
      const Complex z1(-1 + 2 * (a + 0.5) / 20, -0.9 + 1.8 * (b + 0.5) / 20);
      check(fixtures::f1(), z1, fixtures::f1_roots(z1));
      const Complex z2(-0.6 + 1.2 * (a + 0.5) / 20, -0.6 + 1.2 * (b + 0.5) / 20);
      check(fixtures::f2(), z2, fixtures::f2_roots(z2));
    }
}

TEST_CASE("beta equals gamma on random scalar symbols") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ux(0, kTwoPi), uxi(-1, 1);
  int tested = 0;
  while (tested < 100) {
    const MatrixSymbol s = random_scalar_symbol(rng);
    const Complex z = eval_symbol(s, {ux(rng), uxi(rng)})(0, 0);
    const RootInventory inv = find_roots(s, z);
    if (inv.degenerate) continue;
    CHECK(inv.beta == inv.gamma);
    CHECK(inv.beta >= 1);
    ++tested;
  }
}

TEST_CASE("winding around each root follows the bracket sign and sums to the boundary winding") {
  const Complex zs[] = {0.0, Complex(0.2, -0.3), Complex(-0.4, 0.5)};
  for (const MatrixSymbol& s : {fixtures::f1(), fixtures::f2()})
    for (Complex z : zs) {
      const RootInventory inv = find_roots(s, z);
      REQUIRE_FALSE(inv.degenerate);
      int sum = 0;
      for (const auto& r : inv.roots) {
        const int w = winding_number(s, z, circle_loop(r.point, 0.05));
        CHECK(w == (r.bracket > 0 ? 1 : -1));
        sum += w;
      }
      const double C = xi_window(s, std::abs(z)) + 1;
      CHECK(winding_number(s, z, rectangle_loop(0.123, 0.123 + kTwoPi, -C, C)) == 0);
      CHECK(sum == 0);
    }
  CHECK(winding_number(fixtures::f1(), 0, circle_loop({2.0, 3.0}, 0.1)) == 0);
}

TEST_CASE("winding on a loop through a root throws") {
  CHECK_THROWS_AS(winding_number(fixtures::f1(), 0, circle_loop({0.0, -1.05}, 0.05)), Error);
}

TEST_CASE("classify_region") {
  CHECK(classify_region(fixtures::f1(), 2.0 * I).region == Region::OutsideSigma);
  const RegionClass c = classify_region(fixtures::f1(), 0);
  CHECK(c.region == Region::InLambda);
  CHECK(c.inventory.beta == 1);
  CHECK(classify_region(fixtures::f1(), Complex(1, 1)).region == Region::NearPhi);
  CHECK(classify_region(fixtures::f2(), Complex(0, 1)).region == Region::NearPhi);
}

TEST_CASE("count_m_gamma") {
  CHECK(count_m_gamma(fixtures::f1(), {0, 1}, Disk{2.0, 0.5}) == 1);
  CHECK(count_m_gamma(fixtures::f3(), {0, 0}, Rectangle{-2, 2, -2, 2}) == 2);
  CHECK(count_m_gamma(fixtures::f3(), {0, 0}, Rectangle{5, 6, 5, 6}) == 0);
}

TEST_CASE("count_m_gamma is additive over disjoint domains") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ux(0, kTwoPi), uxi(-2, 2);
  const Rectangle left{-3, 0, -3, 3}, right{0, 3, -3, 3}, both{-3, 3, -3, 3};
  const MatrixSymbol f2 = fixtures::f2(), f3 = fixtures::f3();
  for (int t = 0; t < 500; ++t) {
    const PhaseSpacePoint pt{ux(rng), uxi(rng)};
    const MatrixSymbol& sym = t % 2 ? f3 : f2;
    CHECK(count_m_gamma(sym, pt, left) + count_m_gamma(sym, pt, right) == count_m_gamma(sym, pt, both));
  }
}

TEST_CASE("xi window excludes roots") {
  const MatrixSymbol s = fixtures::f2();
  const double w = xi_window(s, 2);
  for (double x = 0; x < kTwoPi; x += 0.1)
    for (double z : {-2.0, 2.0}) CHECK(std::abs(qz(s, {x, w}, z)) > 0);
}
