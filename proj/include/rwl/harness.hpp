#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rwl/config.hpp"
#include "rwl/discretize.hpp"

namespace rwl {

struct DeltaWindow {
  double lower;
  double upper;

  double midpoint() const { return std::sqrt(lower * upper); }
  bool contains(double delta) const { return delta > lower && delta < upper; }
};

/// (h^{N0}, h^{rho + gamma1 + 1/2} (ln 1/h)^{-2}); throws EmptyWindow when lower >= upper.
DeltaWindow delta_window(double h, double rho, double gamma1, double n0);

struct TrialRecord {
  std::string mode;
  double param;  // h or lambda
  int trial;
  std::uint64_t seed;
  int N;
  double W;
  double residual;  // N - W
  int K;
  long long millis;  // 0 unless timing was requested
};

struct ExperimentReport {
  std::string mode;
  std::vector<TrialRecord> trials;
  nlohmann::json summary = nlohmann::json::object();
  /// (param, trial) -> eigenvalues, filled when requested.
  std::vector<std::pair<std::pair<double, int>, Eigen::VectorXcd>> eigenvalues;
};

struct RunOptions {
  bool record_timing = false;
  bool keep_eigenvalues = false;
};

/// Eigenvalue counts of P - delta Q_omega in the domain against (1/2 pi h) times the Weyl measure.
ExperimentReport run_semiclassical(const ExperimentConfig& config, const RunOptions& opts = {});

/// Eigenvalue counts of P - Q_omega in lambda Gamma(0, r_out), one draw per trajectory reused
/// across lambda, against (1/2 pi) times the Weyl measure of the principal symbol.
ExperimentReport run_highenergy(const ExperimentConfig& config, const RunOptions& opts = {});

struct PowerFit {
  double slope;
  double intercept;
  double r_squared;
};

/// Least squares on (log s, log y). Needs >= 3 positive pairs; throws DegenerateFit if all s agree.
PowerFit fit_power_law(const std::vector<std::pair<double, double>>& pairs);

/// h^{-1/2} |ln h|^{1/2}
double semiclassical_envelope(double h);
/// lambda^{1/(2m)} (ln lambda)^{1/2}
double highenergy_envelope(double lambda, int m);

/// Recomputes per-parameter aggregates from the records.
nlohmann::json aggregate(const std::vector<TrialRecord>& trials);

/// trials.csv, summary.json and, when present, eigenvalues.csv.
void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Top-order part A_m(x) xi^m of a symbol.
MatrixSymbol principal_symbol(const MatrixSymbol& s);

/// Checks that every sampled z of the domain lies in Lambda, with plus- and minus-roots sharing
/// base points, distinct base points across pairs, and nonzero xi. Throws HypothesisViolation.
void validate_root_structure(const MatrixSymbol& s, const SpectralDomain& gamma, int samples_per_axis = 5);

}  // namespace rwl
