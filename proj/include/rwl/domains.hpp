#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rwl/core.hpp"

namespace rwl {

/// C^2 radial function on an angular interval, stored as a cubic spline through equispaced nodes.
class RadialProfile {
 public:
  static constexpr int kDefaultNodes = 257;

  static RadialProfile constant(double theta_min, double theta_max, double value);
  static RadialProfile from_function(double theta_min, double theta_max,
                                     const std::function<double(double)>& f, int nodes = kDefaultNodes);
  static RadialProfile from_samples(double theta_min, double theta_max, std::vector<double> samples);

  double operator()(double theta) const;
  RadialProfile scaled(double factor) const;

  double theta_min() const { return theta_min_; }
  double theta_max() const { return theta_max_; }
  const std::vector<double>& samples() const { return samples_; }
  bool is_constant() const { return constant_; }
  double min_value() const;
  double max_value() const;

 private:
  RadialProfile(double theta_min, double theta_max, std::vector<double> samples);

  double theta_min_ = 0;
  double theta_max_ = 0;
  std::vector<double> samples_;
  bool constant_ = true;
  std::shared_ptr<const void> spline_;
};

struct Rectangle {
  double re_min, re_max, im_min, im_max;
};

struct Polygon {
  std::vector<Complex> vertices;
};

struct Disk {
  Complex center;
  double radius;
};

/// {r e^{i theta}: theta in [theta_min, theta_max], r_in(theta) <= r <= r_out(theta)}.
/// An absent inner profile means r_in = 0.
struct AnnularSector {
  double theta_min, theta_max;
  std::optional<RadialProfile> r_in;
  RadialProfile r_out;

  static AnnularSector make(double theta_min, double theta_max, std::optional<RadialProfile> r_in,
                            RadialProfile r_out);
  double inner(double theta) const { return r_in ? (*r_in)(theta) : 0.0; }
};

struct SpectralDomain;

struct Dilated {
  double lambda;
  std::shared_ptr<const SpectralDomain> base;
};

struct SpectralDomain {
  std::variant<Rectangle, Polygon, Disk, AnnularSector, Dilated> shape;

  SpectralDomain(Rectangle r) : shape(std::move(r)) {}
  SpectralDomain(Polygon p) : shape(std::move(p)) {}
  SpectralDomain(Disk d) : shape(std::move(d)) {}
  SpectralDomain(AnnularSector s) : shape(std::move(s)) {}
  SpectralDomain(Dilated d) : shape(std::move(d)) {}
};

bool contains(const SpectralDomain& gamma, Complex z);

SpectralDomain dilate(const SpectralDomain& gamma, double lambda);

double sup_modulus(const SpectralDomain& gamma);

/// Axis-aligned box (re_min, re_max, im_min, im_max) enclosing the domain.
Rectangle bounding_box(const SpectralDomain& gamma);

/// Exact area for the shapes where it is elementary; used by tests.
double area(const SpectralDomain& gamma);

std::string describe(const SpectralDomain& gamma);

/// Core, dyadic rings and cap covering lambda * base for a sector with inner radius 0 and
/// outer profile bounded below by 1.
struct DyadicPieces {
  SpectralDomain core;
  std::vector<SpectralDomain> rings;
  SpectralDomain cap;
  int k0;
};

DyadicPieces dyadic_decompose(double lambda, const AnnularSector& base);

}  // namespace rwl
