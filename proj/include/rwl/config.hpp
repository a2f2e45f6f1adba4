#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rwl/domains.hpp"
#include "rwl/randomness.hpp"
#include "rwl/symbol.hpp"

namespace rwl {

struct PerturbationSettings {
  int alpha_min = 0;
  int alpha_max = 0;
  double rho = 1.2;
  double c_tilde = 1.0;
  std::optional<int> k_q;  // default: 2K of the run

  CoefficientLaw law(int n, int k_q_default) const;
};

struct ExperimentSettings {
  std::string mode = "semiclassical";  // or "highenergy"
  std::vector<double> h_list;
  std::vector<double> lambda_list;
  int trials = 20;
  double gamma1 = 0.25;
  double n0 = 10;
  std::optional<double> delta;  // overrides the window midpoint
  std::string domain;
  double c_k = 2.0;
  std::string label;  // seeds the experiment stream; defaults to the mode
  bool check_rescaling = true;
  bool check_truncation = true;
};

struct ExperimentConfig {
  MatrixSymbol symbol;
  PerturbationSettings perturbation;
  std::vector<std::pair<std::string, SpectralDomain>> domains;
  ExperimentSettings experiment;
  std::uint64_t seed = 0;
  nlohmann::json source;

  /// Named domain; an empty name selects the experiment's domain, then the first one.
  const SpectralDomain& domain(const std::string& name = {}) const;
};

SpectralDomain parse_domain(const nlohmann::json& j);
MatrixSymbol parse_symbol(const nlohmann::json& j);

/// Throws Config on malformed input and the module errors on invalid values.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace rwl
