#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "rwl/harness.hpp"
#include "rwl/weyl_measure.hpp"

using namespace rwl;
using nlohmann::json;

namespace {

const double kPi = std::numbers::pi;

Errc error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

json f2_config(int trials) {
  json j = json::parse(R"({
    "symbol": {"n": 1, "m": 2, "coeffs": [[[0, 0, 1, 0.0, 1.0]], [], [[0, 0, 0, 1.0, 0.0]]]},
    "perturbation": {"alpha_min": 0, "alpha_max": 0, "rho": 1.2},
    "domains": [{"name": "disk", "type": "disk", "center": [0.5, 0.0], "radius": 0.15}],
    "experiment": {"mode": "semiclassical", "h_list": [0.2, 0.15, 0.1], "domain": "disk", "label": "unit/harness"},
    "seed": 7
  })");
  j["experiment"]["trials"] = trials;
  return j;
}

json f4_config() {
  return json::parse(R"({
    "symbol": {"n": 1, "m": 2, "coeffs": [[], [], [[0, 0, 1, 1.0, 0.0]]], "semiclassical": false},
    "perturbation": {"alpha_min": 0, "alpha_max": 0, "rho": 1.1},
    "domains": [{"name": "sector", "type": "sector", "theta": [0.7853981633974483, 1.5707963267948966], "r_out": 1.0}],
    "experiment": {"mode": "highenergy", "lambda_list": [4, 16], "trials": 2, "label": "unit/highenergy"},
    "seed": 3
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("rwl_unit_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("delta window") {
  const DeltaWindow w = delta_window(0.1, 1.2, 0.25, 10);
  CHECK(w.lower == doctest::Approx(1e-10));
  CHECK(w.upper == doctest::Approx(std::pow(0.1, 1.95) / std::pow(std::log(10.0), 2)));
  CHECK(w.upper == doctest::Approx(2.12e-3).epsilon(2e-3));
  CHECK(w.contains(w.midpoint()));
  for (double h : {0.05, 0.01, 1e-3}) CHECK_NOTHROW(delta_window(h, 1.2, 0.25, 10));
  CHECK(error_code([] { delta_window(0.01, 1.2, 0.25, 1); }) == Errc::EmptyWindow);
  CHECK_THROWS_AS(delta_window(1.5, 1.2, 0.25, 10), Error);
}

TEST_CASE("power law fits") {
  std::vector<std::pair<double, double>> sq, flat, noisy;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  for (double s : {0.1, 0.2, 0.4, 0.8, 1.6}) {
    sq.emplace_back(s, s * s);
    flat.emplace_back(s, 3.0);
    noisy.emplace_back(s, 3 * std::pow(s, 1.9) * (1 + u(rng)));
  }
  const PowerFit a = fit_power_law(sq);
  CHECK(a.slope == doctest::Approx(2));
  CHECK(a.r_squared == doctest::Approx(1));
  CHECK(std::abs(fit_power_law(flat).slope) < 1e-12);
  CHECK(fit_power_law(noisy).slope == doctest::Approx(1.9).epsilon(0.05 / 1.9));
  CHECK(error_code([] { fit_power_law({{1, 1}, {1, 2}, {1, 3}}); }) == Errc::DegenerateFit);
  CHECK_THROWS_AS(fit_power_law({{1, 1}, {2, 2}}), Error);
}

TEST_CASE("envelopes") {
  CHECK(semiclassical_envelope(0.1) == doctest::Approx(std::sqrt(std::log(10.0) / 0.1)));
  CHECK(highenergy_envelope(16, 2) == doctest::Approx(2 * std::sqrt(std::log(16.0))));
}

TEST_CASE("principal symbol keeps the top order") {
  const MatrixSymbol p = principal_symbol(fixtures::f2());
  CHECK(p.order() == 2);
  CHECK_FALSE(p.has_order(0));
  CHECK(std::abs(eval_symbol(p, {1.0, 2.0})(0, 0) - 4.0) < 1e-15);
}

TEST_CASE("root structure validation") {
  CHECK_NOTHROW(validate_root_structure(fixtures::f2(), Disk{0.5, 0.15}));
  // F1 plus- and minus-roots sit at different base points
  CHECK(error_code([] { validate_root_structure(fixtures::f1(), Disk{0, 0.5}); }) == Errc::HypothesisViolation);
  // crosses the unit circle, where the bracket vanishes
  CHECK(error_code([] { validate_root_structure(fixtures::f2(), Disk{1.0, 0.3}); }) == Errc::HypothesisViolation);
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = load_config(std::filesystem::path(RWL_TEST_DATA) / "f2_small.json");
  CHECK(c.symbol.order() == 2);
  CHECK(c.experiment.h_list.size() == 3);
  CHECK(c.seed == 7);
  CHECK(contains(c.domain(), Complex(0.55, 0.05)));
  CHECK(error_code([] { parse_config(json::parse(R"({"seed": 1})")); }) == Errc::Config);
  CHECK(error_code([] {
          parse_config(json::parse(R"({"symbol": {"n": 1, "m": 1, "coeffs": [[], [[0, 0, 0, 1, 0]]]},
                                        "experiment": {"mode": "other"}})"));
        }) == Errc::Config);
}

TEST_CASE("semiclassical runs: Weyl prefactor, accounting and determinism") {
  const ExperimentConfig c = parse_config(f2_config(2));
  const ExperimentReport r = run_semiclassical(c);
  REQUIRE(r.trials.size() == 6);
  const double measure = r.summary["weyl_measure"]["value"].get<double>();
  CHECK(measure == doctest::Approx(weyl_measure(c.symbol, c.domain()).value));
  for (const auto& t : r.trials) {
    CHECK(t.W == doctest::Approx(measure / (kTwoPi * t.param)));
    CHECK(t.residual == doctest::Approx(t.N - t.W));
    CHECK(t.millis == 0);
  }

  const auto d1 = scratch("semi1"), d2 = scratch("semi2");
  write_report(r, d1);
  write_report(run_semiclassical(parse_config(f2_config(2))), d2);
  CHECK(slurp(d1 / "trials.csv") == slurp(d2 / "trials.csv"));

  std::istringstream rows(slurp(d1 / "trials.csv"));
  std::string line;
  int count = -1;
  while (std::getline(rows, line)) ++count;
  CHECK(count == 6);

  const json back = json::parse(slurp(d1 / "summary.json"));
  CHECK(back["aggregates"] == aggregate(r.trials));
  CHECK(back["aggregates"] == r.summary["aggregates"]);
  CHECK(back.contains("versions"));
  CHECK_FALSE(std::filesystem::exists(d1 / "eigenvalues.csv"));
}

TEST_CASE("unperturbed control disagrees with the Weyl prediction") {
  json cfg = f2_config(1);
  cfg["experiment"]["delta"] = 0.0;
  cfg["experiment"]["h_list"] = {0.1, 0.08, 0.07};
  const ExperimentReport r = run_semiclassical(parse_config(cfg));
  for (const auto& t : r.trials) CHECK(std::abs(t.N - t.W) > 0.5 * t.W);
}

TEST_CASE("high-energy runs reuse one draw per trajectory") {
  const ExperimentConfig c = parse_config(f4_config());
  const ExperimentReport r = run_highenergy(c, {false, true});
  REQUIRE(r.trials.size() == 4);
  for (const auto& t : r.trials) {
    CHECK(t.W == doctest::Approx((kPi / 4) * std::sqrt(t.param) / kPi).epsilon(2e-3));
    CHECK(t.seed == 3);
  }
  CHECK(r.summary["rescaling"]["exact"].get<bool>());
  CHECK(r.eigenvalues.size() == 4);

  const auto d = scratch("high");
  write_report(r, d);
  CHECK(std::filesystem::exists(d / "eigenvalues.csv"));
}

TEST_CASE("high-energy hypotheses are checked") {
  json cfg = f4_config();
  cfg["perturbation"]["rho"] = 1.5;
  CHECK(error_code([&] { run_highenergy(parse_config(cfg)); }) == Errc::HypothesisViolation);
  cfg["perturbation"]["rho"] = 1.1;
  cfg["experiment"]["gamma1"] = 0.5;
  CHECK(error_code([&] { run_highenergy(parse_config(cfg)); }) == Errc::WindowViolation);
}

TEST_CASE("empty reports and IO errors") {
  const auto d = scratch("empty");
  write_report(ExperimentReport{"semiclassical", {}, json::object(), {}}, d);
  CHECK(slurp(d / "trials.csv") == "mode,h_or_lambda,trial,seed,N,W,residual,K,millis\n");
  CHECK(json::parse(slurp(d / "summary.json")).is_object());

  const auto blocker = scratch("blocker");
  std::ofstream(blocker) << "x";
  try {
    write_report(ExperimentReport{}, blocker / "sub");
    FAIL("expected an IO error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Io);
    CHECK(std::string(e.what()).find("blocker") != std::string::npos);
  }
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3, 2.5e-300, -7.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}
