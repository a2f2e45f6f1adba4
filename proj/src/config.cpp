#include "rwl/config.hpp"

#include <fstream>

namespace rwl {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

Complex parse_complex(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw Error(Errc::Config, "expected a number or [re, im]");
}

RadialProfile parse_profile(const json& j, double a, double b) {
  if (j.is_number()) return RadialProfile::constant(a, b, j.get<double>());
  if (j.is_array()) return RadialProfile::from_samples(a, b, j.get<std::vector<double>>());
  throw Error(Errc::Config, "profile must be a number or a list of samples");
}

}  // namespace

CoefficientLaw PerturbationSettings::law(int n, int k_q_default) const {
  return CoefficientLaw(alpha_min, alpha_max, n, rho, c_tilde, k_q.value_or(k_q_default));
}

SpectralDomain parse_domain(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "rectangle") {
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != 2 || im.size() != 2 || re[0] > re[1] || im[0] > im[1])
      throw Error(Errc::Config, "rectangle needs re: [min, max] and im: [min, max]");
    return Rectangle{re[0], re[1], im[0], im[1]};
  }
  if (type == "polygon") {
    Polygon p;
    for (const auto& v : j.at("vertices")) p.vertices.push_back(parse_complex(v));
    if (p.vertices.size() < 3) throw Error(Errc::Config, "polygon needs at least 3 vertices");
    return p;
  }
  if (type == "disk") {
    const double r = j.at("radius").get<double>();
    if (!(r > 0)) throw Error(Errc::Config, "disk radius must be positive");
    return Disk{parse_complex(j.at("center")), r};
  }
  if (type == "sector") {
    const auto th = j.at("theta").get<std::vector<double>>();
    if (th.size() != 2) throw Error(Errc::Config, "sector needs theta: [min, max]");
    std::optional<RadialProfile> r_in;
    if (j.contains("r_in") && !j.at("r_in").is_null()) r_in = parse_profile(j.at("r_in"), th[0], th[1]);
    return AnnularSector::make(th[0], th[1], std::move(r_in), parse_profile(j.at("r_out"), th[0], th[1]));
  }
  if (type == "dilated") return dilate(parse_domain(j.at("base")), j.at("lambda").get<double>());
  throw Error(Errc::Config, "unknown domain type '" + type + "'");
}

MatrixSymbol parse_symbol(const json& j) {
  const int n = j.at("n").get<int>();
  const int m = j.at("m").get<int>();
  const json& coeffs = j.at("coeffs");
  if (!coeffs.is_array() || static_cast<int>(coeffs.size()) != m + 1)
    throw Error(Errc::Config, "symbol.coeffs needs one list per order 0..m");
  std::vector<SymbolEntry> entries;
  for (int a = 0; a <= m; ++a)
    for (const auto& e : coeffs[static_cast<size_t>(a)]) {
      if (!e.is_array() || e.size() != 5) throw Error(Errc::Config, "coefficient entries are [i, j, k, re, im]");
      entries.push_back({a, e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), {e[3].get<double>(), e[4].get<double>()}});
    }
  return MatrixSymbol::from_entries(n, m, entries, get_or(j, "semiclassical", true));
}

const SpectralDomain& ExperimentConfig::domain(const std::string& name) const {
  const std::string& want = name.empty() ? experiment.domain : name;
  if (domains.empty()) throw Error(Errc::Config, "config defines no domains");
  if (want.empty()) return domains.front().second;
  for (const auto& [n, d] : domains)
    if (n == want) return d;
  throw Error(Errc::Config, "unknown domain '" + want + "'");
}

ExperimentConfig parse_config(const json& j) {
  try {
    ExperimentConfig c{parse_symbol(j.at("symbol")), {}, {}, {}, get_or<std::uint64_t>(j, "seed", 0), j};
    if (j.contains("perturbation")) {
      const json& p = j.at("perturbation");
      c.perturbation.alpha_min = get_or(p, "alpha_min", 0);
      c.perturbation.alpha_max = get_or(p, "alpha_max", c.perturbation.alpha_min);
      c.perturbation.rho = get_or(p, "rho", 1.2);
      c.perturbation.c_tilde = get_or(p, "c_tilde", 1.0);
      if (p.contains("K_q") && !p.at("K_q").is_null()) c.perturbation.k_q = p.at("K_q").get<int>();
      if (c.perturbation.alpha_max > c.symbol.order() - 1)
        throw Error(Errc::HypothesisViolation, "perturbation order must stay below the symbol order");
      c.perturbation.law(c.symbol.dim(), 0);  // validates the bounds
    }
    if (j.contains("domains")) {
      int idx = 0;
      for (const auto& d : j.at("domains")) {
        std::string name = get_or<std::string>(d, "name", "domain" + std::to_string(idx));
        c.domains.emplace_back(std::move(name), parse_domain(d));
        ++idx;
      }
    }
    if (j.contains("experiment")) {
      const json& e = j.at("experiment");
      auto& x = c.experiment;
      x.mode = get_or<std::string>(e, "mode", "semiclassical");
      if (x.mode != "semiclassical" && x.mode != "highenergy")
        throw Error(Errc::Config, "experiment.mode must be semiclassical or highenergy");
      x.h_list = get_or(e, "h_list", std::vector<double>{});
      x.lambda_list = get_or(e, "lambda_list", std::vector<double>{});
      x.trials = get_or(e, "trials", 20);
      x.gamma1 = get_or(e, "gamma1", 0.25);
      x.n0 = get_or(e, "N0", 10.0);
      if (e.contains("delta") && !e.at("delta").is_null()) x.delta = e.at("delta").get<double>();
      x.domain = get_or<std::string>(e, "domain", "");
      x.c_k = get_or(e, "c_K", 2.0);
      x.label = get_or<std::string>(e, "label", x.mode);
      x.check_rescaling = get_or(e, "check_rescaling", true);
      x.check_truncation = get_or(e, "check_truncation", true);
      if (x.trials < 1) throw Error(Errc::Config, "experiment.trials must be >= 1");
      for (double h : x.h_list)
        if (!(h > 0 && h < 1)) throw Error(Errc::Config, "h values must lie in (0, 1)");
      for (double l : x.lambda_list)
        if (!(l >= 1)) throw Error(Errc::Config, "lambda values must be >= 1");
      if (!(x.c_k > 0)) throw Error(Errc::Config, "c_K must be positive");
      if (!x.domain.empty()) c.domain(x.domain);
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::Config, e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::Config, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace rwl
