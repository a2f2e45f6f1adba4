#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "rwl/core.hpp"

namespace rwl {

/// Standard deviation of the coefficient q_{alpha,k}^{ij}; may depend on h.
using SigmaRule = std::function<double(int alpha, int i, int j, int k, double h)>;

/// <k> = (1 + k^2)^{1/2}
inline double japanese(double k) { return std::sqrt(1 + k * k); }

class CoefficientLaw {
 public:
  /// An empty rule means sigma = <k>^{-rho}. Throws BoundViolation if the rule leaves
  /// [<k>^{-rho} / c_tilde, c_tilde <k>^{-rho}] (the lower bound applies to the top order
  /// and is skipped when check_lower_bound is false).
  CoefficientLaw(int alpha_min, int alpha_max, int n, double rho, double c_tilde, int k_q, SigmaRule rule = {},
                 bool check_lower_bound = true);

  double sigma(int alpha, int i, int j, int k, double h = 1.0) const;

  int alpha_min() const { return alpha_min_; }
  int alpha_max() const { return alpha_max_; }
  int dim() const { return n_; }
  double rho() const { return rho_; }
  double c_tilde() const { return c_tilde_; }
  int k_q() const { return k_q_; }

  CoefficientLaw with_k_q(int k_q) const;

  /// sum over alpha, i, j and |k| > K_q of sigma.
  double tail_sigma_mass(double h = 1.0) const;

 private:
  int alpha_min_, alpha_max_, n_;
  double rho_, c_tilde_;
  int k_q_;
  SigmaRule rule_;
  bool check_lower_;
};

/// Addresses a draw: (seed, experiment label, trial). Coefficients are keyed further by
/// (alpha, i, j, k), so any coefficient can be regenerated on its own.
struct SeedSpec {
  std::uint64_t seed = 0;
  std::uint64_t experiment = 0;
  std::uint64_t trial = 0;

  static std::uint64_t label(std::string_view name);
};

/// Two independent standard normals from a counter-based hash of the key.
std::pair<double, double> keyed_normal_pair(const SeedSpec& seed, int alpha, int i, int j, int k);

struct PerturbationDraw {
  int alpha_min = 0, alpha_max = 0, n = 1, k_q = 0;
  double h = 1.0;
  SeedSpec seed;
  double dropped_sigma_mass = 0;
  std::vector<Complex> coeffs;  // [(alpha - alpha_min), i, j, k + k_q]

  static PerturbationDraw zeros(int alpha_min, int alpha_max, int n, int k_q);

  Complex coefficient(int alpha, int i, int j, int k) const;
  void set(int alpha, int i, int j, int k, Complex value);

 private:
  size_t index(int alpha, int i, int j, int k) const;
};

Complex sample_coefficient(const CoefficientLaw& law, const SeedSpec& seed, int alpha, int i, int j, int k,
                           double h = 1.0);

PerturbationDraw sample_draw(const CoefficientLaw& law, const SeedSpec& seed, double h = 1.0);

/// sum |q| / sqrt(2 pi): bounds sup_x |Q_alpha^{ij}(x)| summed over all entries.
double sup_norm_estimate(const PerturbationDraw& draw);

void write_draw(std::ostream& os, const PerturbationDraw& draw);
PerturbationDraw read_draw(std::istream& is);

struct TailReport {
  std::vector<double> thresholds;
  std::vector<double> fractions;  // fraction of trials with sum |q| >= threshold
  double sigma_l1 = 0;
  double sigma_linf = 0;
  double mean_statistic = 0;
  int trials = 0;
};

/// Empirical exceedance of sum_{alpha,i,j,k} |q| over independent draws (trials >= 100).
TailReport empirical_tail(const CoefficientLaw& law, const SeedSpec& base, int trials,
                          const std::vector<double>& thresholds, double h = 1.0);

/// exp(c0 l1 / (2 linf) - x^2 / (2 linf l1))
double tail_bound(double x, double c0, double sigma_l1, double sigma_linf);

/// Smallest c0 for which tail_bound dominates every positive empirical fraction of the report.
double fit_tail_constant(const TailReport& report);

}  // namespace rwl
