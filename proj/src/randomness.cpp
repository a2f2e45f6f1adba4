#include "rwl/randomness.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace rwl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t word) { return splitmix64(h ^ splitmix64(word)); }

double unit_open(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53; }

}  // namespace

std::uint64_t SeedSpec::label(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::pair<double, double> keyed_normal_pair(const SeedSpec& seed, int alpha, int i, int j, int k) {
  std::uint64_t h = splitmix64(seed.seed);
  for (std::uint64_t w : {seed.experiment, seed.trial, static_cast<std::uint64_t>(alpha),
                          static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j),
                          static_cast<std::uint64_t>(static_cast<std::int64_t>(k))})
    h = mix(h, w);
  const double u1 = unit_open(mix(h, 1));
  const double u2 = unit_open(mix(h, 2));
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

CoefficientLaw::CoefficientLaw(int alpha_min, int alpha_max, int n, double rho, double c_tilde, int k_q,
                               SigmaRule rule, bool check_lower_bound)
    : alpha_min_(alpha_min), alpha_max_(alpha_max), n_(n), rho_(rho), c_tilde_(c_tilde), k_q_(k_q),
      rule_(std::move(rule)), check_lower_(check_lower_bound) {
  if (alpha_min < 0 || alpha_max < alpha_min || n < 1 || k_q < 0)
    throw Error(Errc::InvalidArgument, "law needs 0 <= alpha_min <= alpha_max, n >= 1, K_q >= 0");
  if (!(rho > 1)) throw Error(Errc::InvalidArgument, "law needs rho > 1");
  if (!(c_tilde >= 1)) throw Error(Errc::InvalidArgument, "law needs c_tilde >= 1");
  if (!rule_) return;
  const int kmax = std::clamp(k_q, 64, 4096);
  for (double h : {1.0, 0.5, 0.1, 0.01})
    for (int a = alpha_min; a <= alpha_max; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = -kmax; k <= kmax; ++k) {
            const double s = rule_(a, i, j, k, h);
            const double ref = std::pow(japanese(k), -rho);
            if (!(s >= 0) || s > c_tilde * ref * (1 + 1e-12))
              throw Error(Errc::BoundViolation, "sigma exceeds c_tilde <k>^{-rho}");
            if (check_lower_ && a == alpha_max && s < ref / c_tilde * (1 - 1e-12))
              throw Error(Errc::BoundViolation, "top-order sigma below <k>^{-rho} / c_tilde");
          }
}

double CoefficientLaw::sigma(int alpha, int i, int j, int k, double h) const {
  return rule_ ? rule_(alpha, i, j, k, h) : std::pow(japanese(k), -rho_);
}

CoefficientLaw CoefficientLaw::with_k_q(int k_q) const {
  CoefficientLaw copy = *this;
  if (k_q < 0) throw Error(Errc::InvalidArgument, "K_q must be >= 0");
  copy.k_q_ = k_q;
  return copy;
}

double CoefficientLaw::tail_sigma_mass(double h) const {
  constexpr int kExplicit = 10000;
  double total = 0;
  for (int a = alpha_min_; a <= alpha_max_; ++a)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        double s = 0;
        for (int k = k_q_ + 1; k <= k_q_ + kExplicit; ++k) s += sigma(a, i, j, k, h) + sigma(a, i, j, -k, h);
        // remainder beyond the explicit range, assuming the <k>^{-rho} profile
        const double n0 = k_q_ + kExplicit + 0.5;
        const double last = (sigma(a, i, j, k_q_ + kExplicit, h) + sigma(a, i, j, -(k_q_ + kExplicit), h)) /
                            std::pow(japanese(k_q_ + kExplicit), -rho_);
        s += last * std::pow(n0, 1 - rho_) / (rho_ - 1);
        total += s;
      }
  return total;
}

PerturbationDraw PerturbationDraw::zeros(int alpha_min, int alpha_max, int n, int k_q) {
  PerturbationDraw d;
  d.alpha_min = alpha_min;
  d.alpha_max = alpha_max;
  d.n = n;
  d.k_q = k_q;
  d.coeffs.assign(static_cast<size_t>((alpha_max - alpha_min + 1) * n * n * (2 * k_q + 1)), Complex(0));
  return d;
}

size_t PerturbationDraw::index(int alpha, int i, int j, int k) const {
  return static_cast<size_t>((((alpha - alpha_min) * n + i) * n + j) * (2 * k_q + 1) + (k + k_q));
}

Complex PerturbationDraw::coefficient(int alpha, int i, int j, int k) const {
  if (alpha < alpha_min || alpha > alpha_max || std::abs(k) > k_q) return 0;
  return coeffs[index(alpha, i, j, k)];
}

void PerturbationDraw::set(int alpha, int i, int j, int k, Complex value) {
  if (alpha < alpha_min || alpha > alpha_max || i < 0 || i >= n || j < 0 || j >= n || std::abs(k) > k_q)
    throw Error(Errc::InvalidArgument, "draw coefficient index out of range");
  coeffs[index(alpha, i, j, k)] = value;
}

Complex sample_coefficient(const CoefficientLaw& law, const SeedSpec& seed, int alpha, int i, int j, int k,
                           double h) {
  const double s = law.sigma(alpha, i, j, k, h);
  if (s == 0) return 0;
  const auto [g1, g2] = keyed_normal_pair(seed, alpha, i, j, k);
  return Complex(g1, g2) * (s / std::numbers::sqrt2);
}

PerturbationDraw sample_draw(const CoefficientLaw& law, const SeedSpec& seed, double h) {
  PerturbationDraw d = PerturbationDraw::zeros(law.alpha_min(), law.alpha_max(), law.dim(), law.k_q());
  d.h = h;
  d.seed = seed;
  for (int a = law.alpha_min(); a <= law.alpha_max(); ++a)
    for (int i = 0; i < law.dim(); ++i)
      for (int j = 0; j < law.dim(); ++j)
        for (int k = -law.k_q(); k <= law.k_q(); ++k) d.set(a, i, j, k, sample_coefficient(law, seed, a, i, j, k, h));
  d.dropped_sigma_mass = law.tail_sigma_mass(h);
  return d;
}

double sup_norm_estimate(const PerturbationDraw& draw) {
  double s = 0;
  for (const auto& c : draw.coeffs) s += std::abs(c);
  return s / std::sqrt(kTwoPi);
}

void write_draw(std::ostream& os, const PerturbationDraw& d) {
  os.precision(17);
  os << "# alpha_min alpha_max n K_q h seed experiment trial dropped_sigma_mass\n";
  os << d.alpha_min << ' ' << d.alpha_max << ' ' << d.n << ' ' << d.k_q << ' ' << d.h << ' ' << d.seed.seed << ' '
     << d.seed.experiment << ' ' << d.seed.trial << ' ' << d.dropped_sigma_mass << '\n';
  os << "# alpha i j k re im\n";
  for (int a = d.alpha_min; a <= d.alpha_max; ++a)
    for (int i = 0; i < d.n; ++i)
      for (int j = 0; j < d.n; ++j)
        for (int k = -d.k_q; k <= d.k_q; ++k) {
          const Complex c = d.coefficient(a, i, j, k);
          os << a << ' ' << i << ' ' << j << ' ' << k << ' ' << c.real() << ' ' << c.imag() << '\n';
        }
}

PerturbationDraw read_draw(std::istream& is) {
  std::string line;
  auto next_data_line = [&]() {
    while (std::getline(is, line))
      if (!line.empty() && line[0] != '#') return true;
    return false;
  };
  if (!next_data_line()) throw Error(Errc::Io, "draw file has no header");
  std::istringstream hs(line);
  PerturbationDraw d;
  hs >> d.alpha_min >> d.alpha_max >> d.n >> d.k_q >> d.h >> d.seed.seed >> d.seed.experiment >> d.seed.trial >>
      d.dropped_sigma_mass;
  if (!hs) throw Error(Errc::Io, "malformed draw header");
  PerturbationDraw out = PerturbationDraw::zeros(d.alpha_min, d.alpha_max, d.n, d.k_q);
  out.h = d.h;
  out.seed = d.seed;
  out.dropped_sigma_mass = d.dropped_sigma_mass;
  while (next_data_line()) {
    std::istringstream ls(line);
    int a, i, j, k;
    double re, im;
    if (!(ls >> a >> i >> j >> k >> re >> im)) throw Error(Errc::Io, "malformed draw line: " + line);
    out.set(a, i, j, k, {re, im});
  }
  return out;
}

TailReport empirical_tail(const CoefficientLaw& law, const SeedSpec& base, int trials,
                          const std::vector<double>& thresholds, double h) {
  if (trials < 100) throw Error(Errc::InvalidArgument, "empirical tail needs at least 100 trials");
  TailReport r;
  r.thresholds = thresholds;
  r.fractions.assign(thresholds.size(), 0.0);
  r.trials = trials;
  for (int a = law.alpha_min(); a <= law.alpha_max(); ++a)
    for (int i = 0; i < law.dim(); ++i)
      for (int j = 0; j < law.dim(); ++j)
        for (int k = -law.k_q(); k <= law.k_q(); ++k) {
          const double s = law.sigma(a, i, j, k, h);
          r.sigma_l1 += s;
          r.sigma_linf = std::max(r.sigma_linf, s);
        }
  std::vector<long> hits(thresholds.size(), 0);
  double sum_stat = 0;
  for (int t = 0; t < trials; ++t) {
    SeedSpec seed = base;
    seed.trial = static_cast<std::uint64_t>(t);
    const PerturbationDraw d = sample_draw(law, seed, h);
    double stat = 0;
    for (const auto& c : d.coeffs) stat += std::abs(c);
    sum_stat += stat;
    for (size_t q = 0; q < thresholds.size(); ++q) hits[q] += stat >= thresholds[q] ? 1 : 0;
  }
  for (size_t q = 0; q < thresholds.size(); ++q) r.fractions[q] = static_cast<double>(hits[q]) / trials;
  r.mean_statistic = sum_stat / trials;
  return r;
}

double tail_bound(double x, double c0, double sigma_l1, double sigma_linf) {
  return std::exp(c0 * sigma_l1 / (2 * sigma_linf) - x * x / (2 * sigma_linf * sigma_l1));
}

double fit_tail_constant(const TailReport& r) {
  double c0 = 0;
  for (size_t q = 0; q < r.thresholds.size(); ++q) {
    if (r.fractions[q] <= 0) continue;
    const double x = r.thresholds[q];
    const double need = (std::log(r.fractions[q]) + x * x / (2 * r.sigma_linf * r.sigma_l1)) * 2 * r.sigma_linf /
                        r.sigma_l1;
    c0 = std::max(c0, need);
  }
  return c0;
}

}  // namespace rwl
