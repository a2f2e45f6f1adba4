#include "rwl/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "rwl/linalg.hpp"

namespace rwl {

MatrixSymbol::MatrixSymbol(int n, int m, std::vector<std::vector<TrigPoly>> coeffs, bool semiclassical)
    : n_(n), m_(m), semiclassical_(semiclassical), coeffs_(std::move(coeffs)) {
  if (n < 1 || m < 1) throw Error(Errc::InvalidArgument, "symbol needs n >= 1 and m >= 1");
  if (static_cast<int>(coeffs_.size()) != m + 1) throw Error(Errc::InvalidArgument, "expected m + 1 coefficient orders");
  for (const auto& c : coeffs_)
    if (static_cast<int>(c.size()) != n * n) throw Error(Errc::InvalidArgument, "expected n * n entries per order");
  for (const auto& order : coeffs_)
    for (const auto& p : order) bandwidth_ = std::max(bandwidth_, p.effective_bandwidth());

  top_sigma_min_ = std::numeric_limits<double>::infinity();
  for (int g = 0; g < 1024; ++g) {
    const Eigen::MatrixXcd a = coefficient_matrix(m_, kTwoPi * g / 1024.0);
    const double s = n_ == 1 ? std::abs(a(0, 0)) : Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues()(n_ - 1);
    top_sigma_min_ = std::min(top_sigma_min_, s);
  }
  if (!(top_sigma_min_ > 1e-12 * std::max(1.0, coefficient_bound(m_))))
    throw Error(Errc::HypothesisViolation, "top-order coefficient is not uniformly invertible");
}

MatrixSymbol MatrixSymbol::from_entries(int n, int m, const std::vector<SymbolEntry>& entries, bool semiclassical) {
  if (n < 1 || m < 1) throw Error(Errc::InvalidArgument, "symbol needs n >= 1 and m >= 1");
  std::vector<std::vector<TrigPoly>> coeffs(static_cast<size_t>(m + 1), std::vector<TrigPoly>(static_cast<size_t>(n * n)));
  for (const auto& e : entries) {
    if (e.alpha < 0 || e.alpha > m || e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
      throw Error(Errc::InvalidArgument, "symbol entry index out of range");
    coeffs[static_cast<size_t>(e.alpha)][static_cast<size_t>(e.i * n + e.j)].add_coefficient(e.k, e.value);
  }
  return MatrixSymbol(n, m, std::move(coeffs), semiclassical);
}

bool MatrixSymbol::has_order(int alpha) const {
  return std::any_of(coeffs_[alpha].begin(), coeffs_[alpha].end(), [](const TrigPoly& p) { return !p.is_zero(); });
}

Eigen::MatrixXcd MatrixSymbol::coefficient_matrix(int alpha, double x) const {
  Eigen::MatrixXcd a(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) a(i, j) = coefficient(alpha, i, j)(x);
  return a;
}

Eigen::MatrixXcd MatrixSymbol::coefficient_matrix_dx(int alpha, double x) const {
  Eigen::MatrixXcd a(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      const TrigPoly& p = coefficient(alpha, i, j);
      Complex acc = 0;
      for (int k = -p.bandwidth(); k <= p.bandwidth(); ++k)
        if (k != 0) acc += Complex(0, k) * p.coefficient(k) * std::polar(1.0, k * x);
      a(i, j) = acc;
    }
  return a;
}

Eigen::MatrixXcd MatrixSymbol::fourier_matrix(int alpha, int k) const {
  Eigen::MatrixXcd a(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) a(i, j) = coefficient(alpha, i, j).coefficient(k);
  return a;
}

double MatrixSymbol::coefficient_bound(int alpha) const {
  double b = 0;
  for (int k = -bandwidth_; k <= bandwidth_; ++k) b += fourier_matrix(alpha, k).norm();
  return b;
}

MatrixSymbol MatrixSymbol::adjoint_principal() const {
  std::vector<std::vector<TrigPoly>> c(coeffs_.size(), std::vector<TrigPoly>(static_cast<size_t>(n_ * n_)));
  for (int a = 0; a <= m_; ++a)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) c[a][i * n_ + j] = coefficient(a, j, i).conjugate();
  return MatrixSymbol(n_, m_, std::move(c), semiclassical_);
}

std::vector<SymbolEntry> MatrixSymbol::entries() const {
  std::vector<SymbolEntry> out;
  for (int a = 0; a <= m_; ++a)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        const TrigPoly& p = coefficient(a, i, j);
        for (int k = -p.bandwidth(); k <= p.bandwidth(); ++k)
          if (p.coefficient(k) != Complex(0)) out.push_back({a, i, j, k, p.coefficient(k)});
      }
  return out;
}

Eigen::MatrixXcd eval_symbol(const MatrixSymbol& s, double x, Complex xi) {
  Eigen::MatrixXcd p = s.coefficient_matrix(s.order(), x);
  for (int a = s.order() - 1; a >= 0; --a) p = p * xi + s.coefficient_matrix(a, x);
  return p;
}

Eigen::MatrixXcd eval_symbol(const MatrixSymbol& s, PhaseSpacePoint pt) { return eval_symbol(s, pt.x, Complex(pt.xi)); }

Eigen::MatrixXcd eval_symbol_dxi(const MatrixSymbol& s, double x, Complex xi) {
  Eigen::MatrixXcd p = double(s.order()) * s.coefficient_matrix(s.order(), x);
  for (int a = s.order() - 1; a >= 1; --a) p = p * xi + double(a) * s.coefficient_matrix(a, x);
  return p;
}

Eigen::MatrixXcd eval_symbol_dx(const MatrixSymbol& s, double x, Complex xi) {
  Eigen::MatrixXcd p = s.coefficient_matrix_dx(s.order(), x);
  for (int a = s.order() - 1; a >= 0; --a) p = p * xi + s.coefficient_matrix_dx(a, x);
  return p;
}

std::vector<Complex> symbol_spectrum(const MatrixSymbol& s, PhaseSpacePoint pt) {
  const Eigen::VectorXcd ev = eigenvalues(eval_symbol(s, pt));
  return {ev.data(), ev.data() + ev.size()};
}

namespace {

Complex small_det(const Eigen::MatrixXcd& a) {
  switch (a.rows()) {
    case 1: return a(0, 0);
    case 2: return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    default: return a.partialPivLu().determinant();
  }
}

/// Coefficient matrices at one x, reused across a column of xi values.
struct Column {
  std::vector<Eigen::MatrixXcd> a;

  Column(const MatrixSymbol& s, double x) {
    for (int k = 0; k <= s.order(); ++k) a.push_back(s.coefficient_matrix(k, x));
  }

  Complex q(double xi, Complex z) const {
    Eigen::MatrixXcd p = a.back();
    for (int k = static_cast<int>(a.size()) - 2; k >= 0; --k) p = p * xi + a[static_cast<size_t>(k)];
    p.diagonal().array() -= z;
    return small_det(p);
  }

  /// Complex xi with det(p(x, xi) - z) = 0, from the block companion matrix of the matrix polynomial.
  std::vector<Complex> xi_roots(Complex z) const {
    const Eigen::Index n = a.front().rows();
    const Eigen::Index m = static_cast<Eigen::Index>(a.size()) - 1;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> top(a.back());
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n * m, n * m);
    if (m > 1) c.topRightCorner(n * (m - 1), n * (m - 1)).setIdentity();
    for (Eigen::Index k = 0; k < m; ++k) {
      Eigen::MatrixXcd ak = a[static_cast<size_t>(k)];
      if (k == 0) ak.diagonal().array() -= z;
      c.block(n * (m - 1), n * k, n, n) = -top.solve(ak);
    }
    const Eigen::VectorXcd ev = c.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
  }
};

/// For each root in a, the index of a distinct root in b; closest pairs are matched first.
std::vector<size_t> match_nearest(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  std::vector<std::tuple<double, size_t, size_t>> d;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) d.emplace_back(std::abs(a[i] - b[j]), i, j);
  std::sort(d.begin(), d.end());
  std::vector<bool> used_a(a.size()), used_b(b.size());
  std::vector<size_t> out(a.size());
  for (const auto& [dist, i, j] : d) {
    if (used_a[i] || used_b[j]) continue;
    used_a[i] = used_b[j] = true;
    out[i] = j;
  }
  return out;
}

double periodic_distance(PhaseSpacePoint a, PhaseSpacePoint b) {
  return std::hypot(circle_offset(a.x, b.x), a.xi - b.xi);
}

/// Rough size of q_z near (x, xi), for rounding-level tolerances.
double q_scale(const MatrixSymbol& s, double xi, Complex z) {
  double t = std::abs(z);
  for (int a = 0; a <= s.order(); ++a) t += s.coefficient_bound(a) * std::pow(std::abs(xi), a);
  return std::pow(std::max(t, 1.0), s.dim());
}

struct NewtonResult {
  bool converged;
  PhaseSpacePoint point;
};

NewtonResult newton_root(const MatrixSymbol& s, Complex z, double x, double xi, int max_iter) {
  const double scale = q_scale(s, xi, z);
  Complex q = qz(s, {x, xi}, z);
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(q) <= 1e-14 * scale) return {true, PhaseSpacePoint::make(x, xi)};
    const QzGradient g = qz_gradient(s, {x, xi}, z);
    Eigen::Matrix2d jac;
    jac << g.dx.real(), g.dxi.real(), g.dx.imag(), g.dxi.imag();
    const Eigen::Vector2d f(q.real(), q.imag());
    Eigen::Vector2d step;
    if (std::abs(jac.determinant()) > 1e-14 * jac.squaredNorm())
      step = -jac.partialPivLu().solve(f);
    else
      step = -jac.jacobiSvd(Eigen::ComputeFullU | Eigen::ComputeFullV).solve(f);
    double t = 1;
    Complex qn;
    double xn = x, xin = xi;
    for (int ls = 0; ls < 30; ++ls, t /= 2) {
      xn = x + t * step(0);
      xin = xi + t * step(1);
      qn = qz(s, {xn, xin}, z);
      if (std::abs(qn) < std::abs(q)) break;
    }
    const double moved = std::hypot(xn - x, xin - xi);
    x = xn;
    xi = xin;
    q = qn;
    if (moved <= 1e-15 * (1 + std::abs(x) + std::abs(xi)) && std::abs(q) <= 1e-9 * scale)
      return {true, PhaseSpacePoint::make(x, xi)};
  }
  return {std::abs(q) <= 1e-12 * scale, PhaseSpacePoint::make(x, xi)};
}

}  // namespace

Complex qz(const MatrixSymbol& s, PhaseSpacePoint pt, Complex z) {
  Eigen::MatrixXcd p = eval_symbol(s, pt);
  p.diagonal().array() -= z;
  return small_det(p);
}

QzGradient qz_gradient(const MatrixSymbol& s, PhaseSpacePoint pt, Complex z) {
  const Eigen::MatrixXcd dx = eval_symbol_dx(s, pt.x, pt.xi);
  const Eigen::MatrixXcd dxi = eval_symbol_dxi(s, pt.x, pt.xi);
  if (s.dim() == 1) return {dx(0, 0), dxi(0, 0)};
  Eigen::MatrixXcd b = eval_symbol(s, pt);
  b.diagonal().array() -= z;
  const Eigen::MatrixXcd adj = adjugate(b);
  return {(adj * dx).trace(), (adj * dxi).trace()};
}

double poisson_bracket_indicator(const MatrixSymbol& s, PhaseSpacePoint pt, Complex z) {
  const QzGradient g = qz_gradient(s, pt, z);
  const Complex v = (g.dxi * std::conj(g.dx) - g.dx * std::conj(g.dxi)) / Complex(0, 2);
  if (std::abs(v.imag()) > 1e-12 * std::max(std::abs(g.dx) * std::abs(g.dxi), 1e-300))
    throw Error(Errc::NonConvergence, "bracket indicator lost realness");
  return v.real();
}

double xi_window(const MatrixSymbol& s, double sup_modulus) {
  const int m = s.order();
  double lower = 0;
  int top_lower = 0;
  for (int a = 0; a < m; ++a) {
    lower += s.coefficient_bound(a);
    if (s.has_order(a)) top_lower = a;
  }
  const double b = (sup_modulus + lower) / s.top_sigma_min();
  const double w = 2 * std::max(std::pow(b, 1.0 / (m - top_lower)), std::pow(b, 1.0 / m));
  return std::max(w, 1.0);
}

std::vector<ClassifiedRoot> RootInventory::plus() const {
  std::vector<ClassifiedRoot> out;
  for (const auto& r : roots)
    if (r.sign == RootSign::Plus) out.push_back(r);
  return out;
}

std::vector<ClassifiedRoot> RootInventory::minus() const {
  std::vector<ClassifiedRoot> out;
  for (const auto& r : roots)
    if (r.sign == RootSign::Minus) out.push_back(r);
  return out;
}

RootInventory find_roots(const MatrixSymbol& s, Complex z, const RootSearchOptions& opts) {
  const double window = xi_window(s, std::abs(z));
  const int nx = opts.grid_x;
  const double hx = kTwoPi / nx;

  RootInventory inv{z, {}, 0, 0, false};
  auto refine = [&](double x, double xi, bool required) {
    const NewtonResult r = newton_root(s, z, x, xi, opts.max_iter);
    if (!r.converged || std::abs(r.point.xi) > window) {
      if (required) throw Error(Errc::NonConvergence, "Newton failed from a sign change of Im xi(x)");
      return;
    }
    const bool dup = std::any_of(inv.roots.begin(), inv.roots.end(), [&](const ClassifiedRoot& c) {
      return periodic_distance(c.point, r.point) < opts.dedup_radius;
    });
    if (dup) return;
    const QzGradient g = qz_gradient(s, r.point, z);
    const double b = poisson_bracket_indicator(s, r.point, z);
    const double threshold = opts.eps_phi * (std::norm(g.dx) + std::norm(g.dxi)) / 2;
    inv.roots.push_back({r.point, b > 0 ? RootSign::Plus : RootSign::Minus, b, std::abs(b) <= threshold});
  };

  // Real roots are the x where a complex root xi_k(x) of q_z(x, .) crosses the real axis. A track
  // whose |Im xi| has a local minimum without a sign change may cross twice inside one cell, so
  // Newton is also tried there, without requiring success.
  std::vector<std::vector<Complex>> col(static_cast<size_t>(nx));
  for (int i = 0; i < nx; ++i) col[static_cast<size_t>(i)] = Column(s, i * hx).xi_roots(z);
  auto column = [&](int i) -> const std::vector<Complex>& { return col[static_cast<size_t>((i + nx) % nx)]; };
  std::vector<size_t> from_prev = match_nearest(column(0), column(-1));
  for (int i = 0; i < nx; ++i) {
    const auto& cur = column(i);
    const auto& prev = column(i - 1);
    const auto& next = column(i + 1);
    const std::vector<size_t> to_next = match_nearest(cur, next);
    for (size_t k = 0; k < cur.size(); ++k) {
      const Complex a = prev[from_prev[k]], b = cur[k], c = next[to_next[k]];
      if (b.imag() == 0 || (b.imag() > 0) != (c.imag() > 0)) {
        const double t = b.imag() == c.imag() ? 0.0 : b.imag() / (b.imag() - c.imag());
        refine((i + t) * hx, (b + t * (c - b)).real(), true);
      } else if ((a.imag() > 0) == (b.imag() > 0) && std::abs(b.imag()) <= std::abs(a.imag()) &&
                 std::abs(b.imag()) <= std::abs(c.imag())) {
        refine(i * hx, b.real(), false);
      }
    }
    // next's roots indexed back to cur, for the following column
    std::vector<size_t> back(next.size());
    for (size_t k = 0; k < cur.size(); ++k) back[to_next[k]] = k;
    from_prev = back;
  }
  std::sort(inv.roots.begin(), inv.roots.end(), [](const ClassifiedRoot& a, const ClassifiedRoot& b) {
    return a.point.x < b.point.x || (a.point.x == b.point.x && a.point.xi < b.point.xi);
  });
  for (const auto& r : inv.roots) {
    (r.sign == RootSign::Plus ? inv.beta : inv.gamma)++;
    inv.degenerate = inv.degenerate || r.degenerate;
  }
  return inv;
}

int winding_number(const MatrixSymbol& s, Complex z, const std::vector<Eigen::Vector2d>& loop) {
  if (loop.size() < 3) throw Error(Errc::InvalidArgument, "loop needs at least 3 vertices");
  double scale = 0;
  for (const auto& v : loop) scale = std::max(scale, q_scale(s, v(1), z));
  const double zero_tol = 1e-12 * scale;

  auto eval = [&](const Eigen::Vector2d& p) {
    const Complex q = qz(s, {p(0), p(1)}, z);
    if (std::abs(q) <= zero_tol) throw Error(Errc::ZeroOnContour, "q_z vanishes on the loop");
    return q;
  };

  double total = 0;
  constexpr int kInitial = 64;
  for (size_t e = 0; e < loop.size(); ++e) {
    const Eigen::Vector2d a = loop[e], b = loop[(e + 1) % loop.size()];
    Eigen::Vector2d prev = a;
    Complex qprev = eval(a);
    for (int k = 1; k <= kInitial; ++k) {
      const Eigen::Vector2d next = a + (b - a) * (double(k) / kInitial);
      // bisect until consecutive samples differ by less than a quarter turn
      std::vector<std::pair<Eigen::Vector2d, int>> stack{{next, 0}};
      while (!stack.empty()) {
        auto [p, depth] = stack.back();
        const Complex qp = eval(p);
        const double d = std::arg(qp / qprev);
        if (std::abs(d) > std::numbers::pi / 4 && depth < 40) {
          stack.push_back({(prev + p) / 2, depth + 1});
          continue;
        }
        total += d;
        prev = p;
        qprev = qp;
        stack.pop_back();
      }
    }
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

std::vector<Eigen::Vector2d> circle_loop(PhaseSpacePoint center, double radius, int points) {
  std::vector<Eigen::Vector2d> loop;
  for (int k = 0; k < points; ++k) {
    const double t = kTwoPi * k / points;
    loop.emplace_back(center.x + radius * std::cos(t), center.xi + radius * std::sin(t));
  }
  return loop;
}

std::vector<Eigen::Vector2d> rectangle_loop(double x0, double x1, double xi0, double xi1) {
  return {Eigen::Vector2d(x0, xi0), Eigen::Vector2d(x1, xi0), Eigen::Vector2d(x1, xi1), Eigen::Vector2d(x0, xi1)};
}

RegionClass classify_region(const MatrixSymbol& s, Complex z, const RootSearchOptions& opts) {
  try {
    RootInventory inv = find_roots(s, z, opts);
    if (inv.roots.empty()) return {Region::OutsideSigma, std::move(inv)};
    return {inv.degenerate ? Region::NearPhi : Region::InLambda, std::move(inv)};
  } catch (const Error& e) {
    if (e.code() != Errc::NonConvergence) throw;
    return {Region::NearPhi, RootInventory{z, {}, 0, 0, true}};
  }
}

int count_m_gamma(const MatrixSymbol& s, PhaseSpacePoint pt, const SpectralDomain& gamma) {
  const Eigen::MatrixXcd p = eval_symbol(s, pt);
  if (s.dim() == 1) return contains(gamma, p(0, 0)) ? 1 : 0;
  const Eigen::VectorXcd ev = eigenvalues(p);
  int c = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) c += contains(gamma, ev(i)) ? 1 : 0;
  return c;
}

}  // namespace rwl
