#include "rwl/quasimode.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

namespace rwl {

EigenBranch::EigenBranch(std::shared_ptr<const MatrixSymbol> s, Complex z, PhaseSpacePoint root, double gap)
    : symbol_(std::move(s)), z_(z), root_(root), gap_(gap) {}

BranchValue EigenBranch::eval(double x, Complex xi, Complex guess) const {
  const MatrixSymbol& s = *symbol_;
  const Eigen::MatrixXcd p = eval_symbol(s, x, xi);
  const Eigen::MatrixXcd pxi = eval_symbol_dxi(s, x, xi);
  const Eigen::MatrixXcd px = eval_symbol_dx(s, x, xi);
  if (s.dim() == 1) return {p(0, 0), pxi(0, 0), px(0, 0), Eigen::VectorXcd::Ones(1)};

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(p, true);
  if (es.info() != Eigen::Success) throw Error(Errc::NoConvergence, "symbol eigenproblem did not converge");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - guess) < std::abs(es.eigenvalues()(best) - guess)) best = i;
  const Eigen::MatrixXcd vinv = es.eigenvectors().inverse();
  const Eigen::VectorXcd v = es.eigenvectors().col(best);
  const Eigen::RowVectorXcd w = vinv.row(best);  // w v = 1
  return {es.eigenvalues()(best), (w * pxi * v)(0, 0), (w * px * v)(0, 0), v.normalized()};
}

EigenBranch locate_branch(const MatrixSymbol& s, Complex z, PhaseSpacePoint root, double gap_tol) {
  const Eigen::MatrixXcd p = eval_symbol(s, root);
  const Eigen::VectorXcd ev = s.dim() == 1 ? Eigen::VectorXcd(p.diagonal()) : Eigen::VectorXcd(p.eigenvalues());
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (std::abs(ev(i) - z) < std::abs(ev(best) - z)) best = i;
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (i != best) gap = std::min(gap, std::abs(ev(i) - ev(best)));
  if (gap <= gap_tol * std::max(1.0, std::abs(ev(best))))
    throw Error(Errc::MultipleEigenvalue, "eigenvalue at the root is not simple");
  return EigenBranch(std::make_shared<const MatrixSymbol>(s), z, root, gap);
}

Complex Phase::phi_at(double offset) const {
  const double u = offset / step;
  int j = static_cast<int>(std::floor(u));
  j = std::clamp(j, -left, right - 1);
  const double t = u - j;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * phi[slot(j)] + h10 * step * xi[slot(j)] + h01 * phi[slot(j + 1)] + h11 * step * xi[slot(j + 1)];
}

Complex Phase::xi_at(double offset) const {
  const double u = offset / step;
  int j = std::clamp(static_cast<int>(std::floor(u)), -left, right - 1);
  const double t = u - j;
  return (1 - t) * xi[slot(j)] + t * xi[slot(j + 1)];
}

namespace {

struct Marched {
  std::vector<Complex> xi, phi, dxi;
  std::vector<Eigen::VectorXcd> vec;
};

/// Newton solve of lambda(x, xi) = z in complex xi starting from a predictor.
bool solve_point(const EigenBranch& b, double x, Complex& xi, Complex& guess, BranchValue& out,
                 const EikonalOptions& o) {
  for (int it = 0; it < o.max_iter; ++it) {
    out = b.eval(x, xi, guess);
    if (out.dxi == Complex(0)) return false;
    const Complex dx = (out.lambda - b.z()) / out.dxi;
    xi -= dx;
    guess = out.lambda;
    if (std::abs(dx) <= o.newton_tol * (1 + std::abs(xi))) {
      out = b.eval(x, xi, guess);
      return true;
    }
  }
  return false;
}

Marched march(const EigenBranch& b, int dir, int steps, const EikonalOptions& o) {
  const PhaseSpacePoint r = b.root();
  const double cap = o.step_cap_factor * (r.xi != 0 ? std::abs(r.xi) : 1.0);
  Marched m;
  Complex xi = r.xi, guess = b.z();
  BranchValue v = b.eval(r.x, xi, guess);
  Eigen::VectorXcd prev_vec = v.right;
  for (int j = 1; j <= steps; ++j) {
    const double s = dir * o.step;
    const double xprev = r.x + dir * (j - 1) * o.step;
    const Complex slope = -v.dx / v.dxi;
    const Complex xi_prev = xi;
    const Complex phi_prev = m.phi.empty() ? Complex(0) : m.phi.back();

    Complex xm = xi_prev + 0.5 * s * slope, gm = v.lambda;
    BranchValue vm;
    if (!solve_point(b, xprev + 0.5 * s, xm, gm, vm, o)) break;
    Complex xn = xi_prev + s * slope, gn = vm.lambda;
    BranchValue vn;
    if (!solve_point(b, xprev + s, xn, gn, vn, o)) break;
    if (std::abs(xn - xi_prev) > cap || std::abs(xm - xi_prev) > cap) break;

    const Complex phi = phi_prev + s / 6.0 * (xi_prev + 4.0 * xm + xn);
    if (o.stop_at_imag_max && phi.imag() < phi_prev.imag()) break;

    Eigen::VectorXcd vec = vn.right;
    const Complex ov = prev_vec.dot(vec);
    if (std::abs(ov) > 0) vec *= std::conj(ov) / std::abs(ov);
    prev_vec = vec;

    xi = xn;
    v = vn;
    m.xi.push_back(xn);
    m.phi.push_back(phi);
    m.dxi.push_back(vn.dxi);
    m.vec.push_back(vec);
  }
  return m;
}

double smooth_step(double t) {
  auto f = [](double u) { return u > 0 ? std::exp(-1.0 / u) : 0.0; };
  if (t <= 0) return 1;
  if (t >= 1) return 0;
  return f(1 - t) / (f(1 - t) + f(t));
}

/// 4-point Lagrange interpolation of column data sampled on integer nodes lo..hi.
Eigen::VectorXcd lagrange4(const Eigen::MatrixXcd& cols, double u, int lo, int hi) {
  int j = std::clamp(static_cast<int>(std::floor(u)) - 1, lo, hi - 3);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(cols.rows());
  for (int a = 0; a < 4; ++a) {
    double w = 1;
    for (int b = 0; b < 4; ++b)
      if (b != a) w *= (u - (j + b)) / double(a - b);
    out += w * cols.col(j + a - lo);
  }
  return out;
}

std::vector<Complex> fft_forward(const std::vector<Complex>& in) {
  Eigen::FFT<double> fft;
  std::vector<Complex> out;
  fft.fwd(out, in);
  return out;
}

std::vector<Complex> fft_inverse(const std::vector<Complex>& in) {
  Eigen::FFT<double> fft;
  std::vector<Complex> out;
  fft.inv(out, in);
  return out;
}

int signed_frequency(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

std::vector<Complex> row(const Quasimode& q, int component) {
  std::vector<Complex> u(static_cast<size_t>(q.grid_size()));
  for (int c = 0; c < q.grid_size(); ++c) u[static_cast<size_t>(c)] = q.samples(component, c);
  return u;
}

/// (hD)^alpha applied spectrally to one component of the samples.
std::vector<Complex> apply_hd(const Quasimode& q, int component, int alpha) {
  const int n = q.grid_size();
  std::vector<Complex> u = row(q, component);
  if (alpha == 0) return u;
  std::vector<Complex> f = fft_forward(u);
  for (int idx = 0; idx < n; ++idx) f[static_cast<size_t>(idx)] *= std::pow(q.h * signed_frequency(idx, n), alpha);
  return fft_inverse(f);
}

}  // namespace

Phase solve_eikonal(const EigenBranch& b, double left_radius, double right_radius, const EikonalOptions& o) {
  const int nr = static_cast<int>(std::floor(right_radius / o.step + 1e-9));
  const int nl = static_cast<int>(std::floor(left_radius / o.step + 1e-9));
  const Marched r = march(b, +1, nr, o);
  const Marched l = march(b, -1, nl, o);
  if (r.xi.size() < 8 || l.xi.size() < 8)
    throw Error(Errc::BranchLoss, "eikonal continuation lost the branch next to the root");

  Phase ph;
  ph.x0 = b.root().x;
  ph.step = o.step;
  ph.left = static_cast<int>(l.xi.size());
  ph.right = static_cast<int>(r.xi.size());
  const BranchValue v0 = b.eval(b.root().x, b.root().xi, b.z());
  for (int j = ph.left - 1; j >= 0; --j) {
    ph.xi.push_back(l.xi[j]);
    ph.phi.push_back(l.phi[j]);
    ph.dxi_lambda.push_back(l.dxi[j]);
    ph.eigvec.push_back(l.vec[j]);
  }
  ph.xi.push_back(b.root().xi);
  ph.phi.push_back(0);
  ph.dxi_lambda.push_back(v0.dxi);
  ph.eigvec.push_back(v0.right);
  for (size_t j = 0; j < r.xi.size(); ++j) {
    ph.xi.push_back(r.xi[j]);
    ph.phi.push_back(r.phi[j]);
    ph.dxi_lambda.push_back(r.dxi[j]);
    ph.eigvec.push_back(r.vec[j]);
  }
  return ph;
}

Eigen::MatrixXcd leading_amplitude(const EigenBranch& b, const Phase& ph) {
  const int n = b.symbol().dim();
  const int total = ph.left + ph.right + 1;
  Eigen::MatrixXcd a(n, total);
  const Complex d0 = ph.dxi_lambda[ph.slot(0)];
  // continuous argument of d0 / d(x), walked outward from the root
  std::vector<double> arg(static_cast<size_t>(total), 0.0);
  for (int dir : {+1, -1}) {
    double acc = 0;
    Complex prev = 1;
    const int end = dir > 0 ? ph.right : ph.left;
    for (int j = 1; j <= end; ++j) {
      const Complex ratio = d0 / ph.dxi_lambda[ph.slot(dir * j)];
      acc += std::arg(ratio / prev);
      prev = ratio;
      arg[ph.slot(dir * j)] = acc;
    }
  }
  for (int j = -ph.left; j <= ph.right; ++j) {
    const Complex ratio = d0 / ph.dxi_lambda[ph.slot(j)];
    const Complex a0 = std::polar(std::sqrt(std::abs(ratio)), arg[ph.slot(j)] / 2);
    a.col(j + ph.left) = a0 * ph.eigvec[ph.slot(j)];
  }
  return a;
}

Quasimode build_quasimode(const MatrixSymbol& s, Complex z, PhaseSpacePoint root, double h, int grid_size,
                          const CutoffOptions& opts) {
  if (!(h > 0) || grid_size < 16) throw Error(Errc::InvalidArgument, "quasimode needs h > 0 and a grid of >= 16 points");
  if (!(poisson_bracket_indicator(s, root, z) > 0))
    throw Error(Errc::InvalidArgument, "quasimodes are built at plus-roots");
  const EigenBranch branch = locate_branch(s, z, root);

  double max_radius = 0.95 * std::numbers::pi;
  if (opts.max_radius) {
    max_radius = *opts.max_radius;
  } else {
    for (const auto& r : find_roots(s, z).roots) {
      const double d = std::abs(circle_offset(r.point.x, root.x));
      if (d > 1e-6) max_radius = std::min(max_radius, d / 2);
    }
  }
  if (opts.support_radius && *opts.support_radius > max_radius)
    throw Error(Errc::CutoffTooWide, "requested support radius exceeds the admissible radius");
  const double want = opts.support_radius.value_or(max_radius);
  const Phase ph = solve_eikonal(branch, want, want, opts.eikonal);
  const double reach = std::min(ph.left_radius(), ph.right_radius());
  if (opts.support_radius && reach + 1e-12 < *opts.support_radius)
    throw Error(Errc::CutoffTooWide, "phase stops growing before the requested support edge");
  const double r1 = opts.support_radius.value_or(reach);
  const double r0 = opts.plateau_fraction * r1;
  const double edge = std::min(ph.phi_at(-r1).imag(), ph.phi_at(r1).imag());
  if (!(edge >= opts.min_edge_imag)) throw Error(Errc::CutoffTooWide, "Im phi is too small at the support edge");

  const Eigen::MatrixXcd amp = leading_amplitude(branch, ph);
  Quasimode q{z, root, h, r0, r1, edge, Eigen::MatrixXcd::Zero(s.dim(), grid_size)};
  for (int g = 0; g < grid_size; ++g) {
    const double d = circle_offset(kTwoPi * g / grid_size, root.x);
    if (std::abs(d) >= r1) continue;
    const double chi = smooth_step((std::abs(d) - r0) / (r1 - r0));
    const Eigen::VectorXcd a = lagrange4(amp, d / ph.step, -ph.left, ph.right);
    q.samples.col(g) = chi * std::exp(Complex(0, 1) * ph.phi_at(d) / h) * a;
  }
  const double norm = std::sqrt(q.samples.squaredNorm() * kTwoPi / grid_size);
  if (!(norm > 0)) throw Error(Errc::NonConvergence, "quasimode vanished on the sample grid");
  q.samples /= norm;
  return q;
}

Eigen::VectorXcd fourier_coefficients(const Quasimode& q, const FourierTruncation& trunc) {
  const int n = q.grid_size();
  if (2 * trunc.K >= n) throw Error(Errc::InvalidArgument, "sample grid too coarse for the truncation");
  Eigen::VectorXcd c(trunc.side());
  const double scale = std::sqrt(kTwoPi) / n;
  for (int comp = 0; comp < trunc.n; ++comp) {
    const std::vector<Complex> f = fft_forward(row(q, comp));
    for (int k = -trunc.K; k <= trunc.K; ++k) c(trunc.index(comp, k)) = scale * f[static_cast<size_t>((k + n) % n)];
  }
  return c;
}

double residual(const OperatorMatrix& m, const Quasimode& q) {
  const Eigen::VectorXcd c = fourier_coefficients(q, m.trunc);
  return (m.entries * c).norm() / c.norm();
}

std::vector<Complex> overlap_coefficients(const Quasimode& ep, const Quasimode& em, int alpha, int i, int j,
                                          int k_max) {
  const int n = ep.grid_size();
  if (em.grid_size() != n) throw Error(Errc::InvalidArgument, "quasimodes use different grids");
  if (2 * k_max >= n) throw Error(Errc::InvalidArgument, "sample grid too coarse for the requested frequencies");
  const std::vector<Complex> f = apply_hd(ep, j, alpha);
  std::vector<Complex> g(static_cast<size_t>(n));
  for (int c = 0; c < n; ++c) g[static_cast<size_t>(c)] = f[static_cast<size_t>(c)] * std::conj(em.samples(i, c));
  const std::vector<Complex> t = fft_inverse(g);  // (1/N) sum_x g(x) e^{ikx}
  std::vector<Complex> out;
  for (int k = -k_max; k <= k_max; ++k) out.push_back(std::sqrt(kTwoPi) * t[static_cast<size_t>((k + n) % n)]);
  return out;
}

Complex overlap_coefficient(const Quasimode& ep, const Quasimode& em, int alpha, int i, int j, int k) {
  return overlap_coefficients(ep, em, alpha, i, j, std::abs(k))[static_cast<size_t>(k + std::abs(k))];
}

double overlap_variance(const Quasimode& ep, const Quasimode& em, const CoefficientLaw& law) {
  double v = 0;
  for (int a = law.alpha_min(); a <= law.alpha_max(); ++a)
    for (int i = 0; i < law.dim(); ++i)
      for (int j = 0; j < law.dim(); ++j) {
        const auto ov = overlap_coefficients(ep, em, a, i, j, law.k_q());
        for (int k = -law.k_q(); k <= law.k_q(); ++k)
          v += std::pow(law.sigma(a, i, j, k, ep.h), 2) * std::norm(ov[static_cast<size_t>(k + law.k_q())]);
      }
  return v;
}

Complex perturbation_pairing(const PerturbationDraw& draw, const Quasimode& ep, const Quasimode& em) {
  const int n = ep.grid_size();
  Complex acc = 0;
  for (int a = draw.alpha_min; a <= draw.alpha_max; ++a)
    for (int j = 0; j < draw.n; ++j) {
      const std::vector<Complex> f = apply_hd(ep, j, a);
      for (int i = 0; i < draw.n; ++i)
        for (int g = 0; g < n; ++g) {
          const double x = kTwoPi * g / n;
          const Complex w = std::polar(1.0, x);
          Complex e = std::polar(1.0, -draw.k_q * x), qx = 0;
          for (int k = -draw.k_q; k <= draw.k_q; ++k, e *= w) qx += draw.coefficient(a, i, j, k) * e;
          acc += qx / std::sqrt(kTwoPi) * f[static_cast<size_t>(g)] * std::conj(em.samples(i, g));
        }
    }
  return acc * kTwoPi / double(n);
}

}  // namespace rwl
