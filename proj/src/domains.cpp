#include "rwl/domains.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/Splines>

namespace rwl {

namespace {

using Spline1 = Eigen::Spline<double, 1, 3>;

std::shared_ptr<const Spline1> fit_spline(const std::vector<double>& samples) {
  const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
  Eigen::RowVectorXd pts(n);
  Eigen::RowVectorXd params(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pts(i) = samples[static_cast<size_t>(i)];
    params(i) = static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return std::make_shared<const Spline1>(Eigen::SplineFitting<Spline1>::Interpolate(pts, 3, params));
}

double normalized_angle(double theta, double theta_min) {
  double t = std::fmod(theta - theta_min, kTwoPi);
  if (t < 0) t += kTwoPi;
  return theta_min + t;
}

bool polygon_contains(const Polygon& p, Complex z) {
  const auto& v = p.vertices;
  const size_t n = v.size();
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Complex a = v[j], b = v[i];
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    double t = len2 > 0 ? ((z - a) * std::conj(ab)).real() / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (std::abs(z - (a + t * ab)) <= kBoundaryTol) return true;
    if ((b.imag() > z.imag()) != (a.imag() > z.imag())) {
      const double xcross = a.real() + (z.imag() - a.imag()) * ab.real() / ab.imag();
      if (z.real() < xcross) inside = !inside;
    }
  }
  return inside;
}

bool sector_contains(const AnnularSector& s, Complex z) {
  const double r = std::abs(z);
  if (r <= kBoundaryTol) return s.inner(s.theta_min) <= kBoundaryTol;
  double theta = normalized_angle(std::arg(z), s.theta_min);
  if (theta > s.theta_max + kBoundaryTol) {
    // angles just below theta_min wrap to the top of the turn
    if (theta - kTwoPi >= s.theta_min - kBoundaryTol) theta -= kTwoPi;
    else return false;
  }
  theta = std::clamp(theta, s.theta_min, s.theta_max);
  return r >= s.inner(theta) - kBoundaryTol && r <= s.r_out(theta) + kBoundaryTol;
}

}  // namespace

RadialProfile::RadialProfile(double theta_min, double theta_max, std::vector<double> samples)
    : theta_min_(theta_min), theta_max_(theta_max), samples_(std::move(samples)) {
  if (!(theta_max_ > theta_min_)) throw Error(Errc::InvalidArgument, "profile needs theta_max > theta_min");
  if (samples_.size() < 4) throw Error(Errc::InvalidArgument, "profile needs at least 4 nodes");
  for (double s : samples_)
    if (!(s >= 0) || !std::isfinite(s)) throw Error(Errc::InvalidArgument, "profile values must be finite and >= 0");
  constant_ = std::all_of(samples_.begin(), samples_.end(), [&](double s) { return s == samples_.front(); });
  if (!constant_) spline_ = fit_spline(samples_);
}

RadialProfile RadialProfile::constant(double theta_min, double theta_max, double value) {
  return RadialProfile(theta_min, theta_max, std::vector<double>(kDefaultNodes, value));
}

RadialProfile RadialProfile::from_function(double theta_min, double theta_max,
                                           const std::function<double(double)>& f, int nodes) {
  std::vector<double> s(static_cast<size_t>(nodes));
  for (int i = 0; i < nodes; ++i) s[static_cast<size_t>(i)] = f(theta_min + (theta_max - theta_min) * i / (nodes - 1));
  return RadialProfile(theta_min, theta_max, std::move(s));
}

RadialProfile RadialProfile::from_samples(double theta_min, double theta_max, std::vector<double> samples) {
  return RadialProfile(theta_min, theta_max, std::move(samples));
}

double RadialProfile::operator()(double theta) const {
  if (constant_) return samples_.front();
  const double u = std::clamp((theta - theta_min_) / (theta_max_ - theta_min_), 0.0, 1.0);
  return (*static_cast<const Spline1*>(spline_.get()))(u)(0);
}

RadialProfile RadialProfile::scaled(double factor) const {
  std::vector<double> s = samples_;
  for (double& v : s) v *= factor;
  return RadialProfile(theta_min_, theta_max_, std::move(s));
}

double RadialProfile::min_value() const {
  if (constant_) return samples_.front();
  double m = *std::min_element(samples_.begin(), samples_.end());
  for (int i = 0; i <= 4096; ++i) m = std::min(m, (*this)(theta_min_ + (theta_max_ - theta_min_) * i / 4096.0));
  return m;
}

double RadialProfile::max_value() const {
  if (constant_) return samples_.front();
  double m = *std::max_element(samples_.begin(), samples_.end());
  for (int i = 0; i <= 4096; ++i) m = std::max(m, (*this)(theta_min_ + (theta_max_ - theta_min_) * i / 4096.0));
  return m;
}

AnnularSector AnnularSector::make(double theta_min, double theta_max, std::optional<RadialProfile> r_in,
                                  RadialProfile r_out) {
  if (!(theta_max > theta_min) || theta_max - theta_min > kTwoPi + 1e-15)
    throw Error(Errc::InvalidArgument, "sector needs 0 < theta_max - theta_min <= 2 pi");
  auto same_range = [&](const RadialProfile& p) {
    return std::abs(p.theta_min() - theta_min) < 1e-12 && std::abs(p.theta_max() - theta_max) < 1e-12;
  };
  if (!same_range(r_out) || (r_in && !same_range(*r_in)))
    throw Error(Errc::InvalidArgument, "profiles must be defined on the sector's angular interval");
  if (r_in) {
    for (size_t i = 0; i < r_out.samples().size() && i < r_in->samples().size(); ++i)
      if (r_in->samples()[i] > r_out.samples()[i])
        throw Error(Errc::InvalidArgument, "inner radius exceeds outer radius");
    if (r_in->is_constant() && r_in->samples().front() == 0.0) r_in.reset();
  }
  return AnnularSector{theta_min, theta_max, std::move(r_in), std::move(r_out)};
}

bool contains(const SpectralDomain& gamma, Complex z) {
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          return z.real() >= s.re_min - kBoundaryTol && z.real() <= s.re_max + kBoundaryTol &&
                 z.imag() >= s.im_min - kBoundaryTol && z.imag() <= s.im_max + kBoundaryTol;
        } else if constexpr (std::is_same_v<T, Polygon>) {
          return polygon_contains(s, z);
        } else if constexpr (std::is_same_v<T, Disk>) {
          return std::abs(z - s.center) <= s.radius + kBoundaryTol;
        } else if constexpr (std::is_same_v<T, AnnularSector>) {
          return sector_contains(s, z);
        } else {
          return contains(*s.base, z / s.lambda);
        }
      },
      gamma.shape);
}

SpectralDomain dilate(const SpectralDomain& gamma, double lambda) {
  if (!(lambda > 0)) throw Error(Errc::NonPositiveLambda, "dilation factor must be positive");
  if (const auto* d = std::get_if<Dilated>(&gamma.shape))
    return Dilated{d->lambda * lambda, d->base};
  return Dilated{lambda, std::make_shared<const SpectralDomain>(gamma)};
}

double sup_modulus(const SpectralDomain& gamma) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          const double re = std::max(std::abs(s.re_min), std::abs(s.re_max));
          const double im = std::max(std::abs(s.im_min), std::abs(s.im_max));
          return std::hypot(re, im);
        } else if constexpr (std::is_same_v<T, Polygon>) {
          double m = 0;
          for (const auto& v : s.vertices) m = std::max(m, std::abs(v));
          return m;
        } else if constexpr (std::is_same_v<T, Disk>) {
          return std::abs(s.center) + s.radius;
        } else if constexpr (std::is_same_v<T, AnnularSector>) {
          return s.r_out.max_value();
        } else {
          return s.lambda * sup_modulus(*s.base);
        }
      },
      gamma.shape);
}

Rectangle bounding_box(const SpectralDomain& gamma) {
  return std::visit(
      [&](const auto& s) -> Rectangle {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          return s;
        } else if constexpr (std::is_same_v<T, Polygon>) {
          Rectangle b{1e300, -1e300, 1e300, -1e300};
          for (const auto& v : s.vertices) {
            b.re_min = std::min(b.re_min, v.real());
            b.re_max = std::max(b.re_max, v.real());
            b.im_min = std::min(b.im_min, v.imag());
            b.im_max = std::max(b.im_max, v.imag());
          }
          return b;
        } else if constexpr (std::is_same_v<T, Disk>) {
          return {s.center.real() - s.radius, s.center.real() + s.radius, s.center.imag() - s.radius,
                  s.center.imag() + s.radius};
        } else if constexpr (std::is_same_v<T, AnnularSector>) {
          Rectangle b{0, 0, 0, 0};
          const int n = 2048;
          for (int i = 0; i <= n; ++i) {
            const double th = s.theta_min + (s.theta_max - s.theta_min) * i / n;
            for (double r : {s.inner(th), s.r_out(th)}) {
              const Complex w = std::polar(r, th);
              b.re_min = std::min(b.re_min, w.real());
              b.re_max = std::max(b.re_max, w.real());
              b.im_min = std::min(b.im_min, w.imag());
              b.im_max = std::max(b.im_max, w.imag());
            }
          }
          return b;
        } else {
          Rectangle b = bounding_box(*s.base);
          return {b.re_min * s.lambda, b.re_max * s.lambda, b.im_min * s.lambda, b.im_max * s.lambda};
        }
      },
      gamma.shape);
}

double area(const SpectralDomain& gamma) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          return (s.re_max - s.re_min) * (s.im_max - s.im_min);
        } else if constexpr (std::is_same_v<T, Polygon>) {
          double a = 0;
          const auto& v = s.vertices;
          for (size_t i = 0, j = v.size() - 1; i < v.size(); j = i++)
            a += v[j].real() * v[i].imag() - v[i].real() * v[j].imag();
          return std::abs(a) / 2;
        } else if constexpr (std::is_same_v<T, Disk>) {
          return std::numbers::pi * s.radius * s.radius;
        } else if constexpr (std::is_same_v<T, AnnularSector>) {
          const int n = 4096;  // composite Simpson
          const double dt = (s.theta_max - s.theta_min) / n;
          double acc = 0;
          for (int i = 0; i <= n; ++i) {
            const double th = s.theta_min + dt * i;
            const double f = (std::pow(s.r_out(th), 2) - std::pow(s.inner(th), 2)) / 2;
            acc += f * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
          }
          return acc * dt / 3;
        } else {
          return s.lambda * s.lambda * area(*s.base);
        }
      },
      gamma.shape);
}

std::string describe(const SpectralDomain& gamma) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          os << "rectangle[" << s.re_min << "," << s.re_max << "]x[" << s.im_min << "," << s.im_max << "]";
        } else if constexpr (std::is_same_v<T, Polygon>) {
          os << "polygon(" << s.vertices.size() << " vertices)";
        } else if constexpr (std::is_same_v<T, Disk>) {
          os << "disk(center=" << s.center.real() << (s.center.imag() < 0 ? "" : "+") << s.center.imag()
             << "i,radius=" << s.radius << ")";
        } else if constexpr (std::is_same_v<T, AnnularSector>) {
          os << "sector(theta=[" << s.theta_min << "," << s.theta_max << "],r_in="
             << (s.r_in ? s.r_in->max_value() : 0.0) << ",r_out_max=" << s.r_out.max_value() << ")";
        } else {
          os << s.lambda << "*" << describe(*s.base);
        }
      },
      gamma.shape);
  return os.str();
}

DyadicPieces dyadic_decompose(double lambda, const AnnularSector& base) {
  if (!(lambda >= 1)) throw Error(Errc::LambdaBelowOne, "dyadic decomposition needs lambda >= 1");
  if (base.r_in) throw Error(Errc::InvalidArgument, "dyadic decomposition needs inner radius 0");
  if (base.r_out.min_value() < 1 - 1e-12)
    throw Error(Errc::InvalidArgument, "dyadic decomposition needs outer radius >= 1");
  const int k0 = static_cast<int>(std::floor(std::log2(lambda)));
  const double two_k0 = std::ldexp(1.0, k0);
  const double a = base.theta_min, b = base.theta_max;
  const auto one = RadialProfile::constant(a, b, 1.0);
  DyadicPieces pieces{AnnularSector::make(a, b, std::nullopt, one), {},
                      Dilated{two_k0, std::make_shared<const SpectralDomain>(AnnularSector::make(
                                          a, b, one, base.r_out.scaled(lambda / two_k0)))},
                      k0};
  const auto ring = std::make_shared<const SpectralDomain>(
      AnnularSector::make(a, b, one, RadialProfile::constant(a, b, 2.0)));
  for (int k = 0; k < k0; ++k) pieces.rings.push_back(Dilated{std::ldexp(1.0, k), ring});
  return pieces;
}

}  // namespace rwl
