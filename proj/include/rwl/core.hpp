#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rwl {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Tolerance used by every membership test on spectral domains.
inline constexpr double kBoundaryTol = 1e-12;

enum class Errc {
  InvalidArgument,
  Config,
  Io,
  HypothesisViolation,
  WindowViolation,
  EmptyWindow,
  BoundViolation,
  BandwidthExceeded,
  NonPositiveLambda,
  LambdaBelowOne,
  MultipleEigenvalue,
  CutoffTooWide,
  NonConvergence,
  NoConvergence,
  ZeroOnContour,
  BranchLoss,
  DegenerateFit,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Process exit code: 2 for configuration or hypothesis problems, 3 for numerical failures.
int exit_code_for(Errc code);

inline double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

/// Signed distance on the circle, in (-pi, pi].
inline double circle_offset(double x, double x0) {
  double d = std::remainder(x - x0, kTwoPi);
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

}  // namespace rwl
