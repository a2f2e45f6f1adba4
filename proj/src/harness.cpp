#include "rwl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "rwl/linalg.hpp"
#include "rwl/weyl_measure.hpp"

namespace rwl {

using nlohmann::json;

DeltaWindow delta_window(double h, double rho, double gamma1, double n0) {
  if (!(h > 0 && h < 1) || !(gamma1 > 0)) throw Error(Errc::InvalidArgument, "delta window needs 0 < h < 1, gamma1 > 0");
  const double lower = std::pow(h, n0);
  const double upper = std::pow(h, rho + gamma1 + 0.5) / std::pow(std::log(1 / h), 2);
  if (!(lower < upper)) throw Error(Errc::EmptyWindow, "delta window is empty at h=" + format_double(h));
  return {lower, upper};
}

double semiclassical_envelope(double h) { return std::sqrt(std::abs(std::log(h)) / h); }

double highenergy_envelope(double lambda, int m) {
  return std::pow(lambda, 1.0 / (2 * m)) * std::sqrt(std::log(lambda));
}

PowerFit fit_power_law(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw Error(Errc::InvalidArgument, "power-law fit needs at least 3 pairs");
  for (const auto& [s, y] : pairs)
    if (!(s > 0 && y > 0)) throw Error(Errc::InvalidArgument, "power-law fit needs positive pairs");
  if (std::all_of(pairs.begin(), pairs.end(), [&](const auto& p) { return p.first == pairs.front().first; }))
    throw Error(Errc::DegenerateFit, "all abscissae are equal");
  Eigen::MatrixXd a(pairs.size(), 2);
  Eigen::VectorXd b(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    a(static_cast<Eigen::Index>(i), 0) = std::log(pairs[i].first);
    a(static_cast<Eigen::Index>(i), 1) = 1;
    b(static_cast<Eigen::Index>(i)) = std::log(pairs[i].second);
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  const double ss_res = (a * c - b).squaredNorm();
  const double ss_tot = (b.array() - b.mean()).matrix().squaredNorm();
  return {c(0), c(1), ss_tot > 0 ? 1 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0)};
}

MatrixSymbol principal_symbol(const MatrixSymbol& s) {
  std::vector<SymbolEntry> top;
  for (const auto& e : s.entries())
    if (e.alpha == s.order()) top.push_back(e);
  return MatrixSymbol::from_entries(s.dim(), s.order(), top, s.semiclassical());
}

void validate_root_structure(const MatrixSymbol& s, const SpectralDomain& gamma, int samples_per_axis) {
  const Rectangle box = bounding_box(gamma);
  const double scale = std::max(1.0, sup_modulus(gamma));
  std::vector<Complex> zs;
  for (int a = 0; a < samples_per_axis; ++a)
    for (int b = 0; b < samples_per_axis; ++b) {
      const double fa = (a + 0.5) / samples_per_axis, fb = (b + 0.5) / samples_per_axis;
      const Complex z(box.re_min + fa * (box.re_max - box.re_min), box.im_min + fb * (box.im_max - box.im_min));
      if (contains(gamma, z) && std::abs(z) > 1e-9 * scale) zs.push_back(z);
    }
  if (zs.empty()) throw Error(Errc::HypothesisViolation, "no sample points inside " + describe(gamma));
  for (const Complex z : zs) {
    const std::string where = " at z=" + format_double(z.real()) + (z.imag() < 0 ? "" : "+") + format_double(z.imag()) + "i";
    const RegionClass rc = classify_region(s, z);
    if (rc.region != Region::InLambda)
      throw Error(Errc::HypothesisViolation, "domain leaves Lambda (the set of regular values)" + where);
    const auto plus = rc.inventory.plus(), minus = rc.inventory.minus();
    if (plus.size() != minus.size())
      throw Error(Errc::HypothesisViolation, "plus- and minus-roots are unpaired" + where);
    for (size_t i = 0; i < plus.size(); ++i) {
      const auto& p = plus[i];
      const bool paired = std::any_of(minus.begin(), minus.end(), [&](const ClassifiedRoot& m) {
        return std::abs(circle_offset(m.point.x, p.point.x)) < 1e-6;
      });
      if (!paired) throw Error(Errc::HypothesisViolation, "a plus-root has no minus-root over the same base point" + where);
      for (size_t k = i + 1; k < plus.size(); ++k)
        if (std::abs(circle_offset(plus[k].point.x, p.point.x)) < 1e-6)
          throw Error(Errc::HypothesisViolation, "two root pairs share a base point" + where);
    }
    for (const auto& r : rc.inventory.roots)
      if (std::abs(r.point.xi) < 1e-9) throw Error(Errc::HypothesisViolation, "root with xi = 0" + where);
  }
}

namespace {

using Clock = std::chrono::steady_clock;

long long elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

int truncation_for(double xi_window, double h, double c_k, int bandwidth) {
  return static_cast<int>(std::ceil(c_k * xi_window / h)) + 2 * bandwidth;
}

}  // namespace

ExperimentReport run_semiclassical(const ExperimentConfig& config, const RunOptions& opts) {
  const auto& x = config.experiment;
  if (x.h_list.empty()) throw Error(Errc::Config, "semiclassical run needs experiment.h_list");
  const MatrixSymbol& s = config.symbol;
  const SpectralDomain& gamma = config.domain();
  const auto& pert = config.perturbation;
  pert.law(s.dim(), 0);
  validate_root_structure(s, gamma);

  const WeylMeasure measure = weyl_measure(s, gamma);
  ExperimentReport report{"semiclassical", {}, json::object(), {}};
  json per_h = json::array();

  for (size_t hi = 0; hi < x.h_list.size(); ++hi) {
    const double h = x.h_list[hi];
    const DeltaWindow window = delta_window(h, pert.rho, x.gamma1, x.n0);
    const double delta = x.delta.value_or(window.midpoint());
    int K = truncation_for(measure.xi_window, h, x.c_k, s.bandwidth());
    OperatorMatrix p = assemble_operator(s, {K, s.dim(), h});
    const double floor = delta_floor(p);
    if (delta != 0 && delta < floor)
      throw Error(Errc::WindowViolation, "delta " + format_double(delta) + " is below the eigensolver floor " +
                                             format_double(floor));
    const std::uint64_t experiment = SeedSpec::label(x.label + "/h" + std::to_string(hi));
    const double W = measure.value / (kTwoPi * h);

    json trunc_log = json::array();
    if (x.check_truncation && delta != 0) {
      const CoefficientLaw probe = pert.law(s.dim(), 4 * K);
      const PerturbationDraw d = sample_draw(probe, {config.seed, experiment, 0}, h);
      for (int attempt = 0; attempt < 2; ++attempt) {
        const TruncationReport tr = truncation_convergence(s, h, gamma, d, delta, {K, 2 * K});
        trunc_log.push_back({{"K", tr.K_values}, {"counts", tr.counts}});
        if (tr.stabilized) break;
        K *= 2;
      }
      p = assemble_operator(s, {K, s.dim(), h});
    }
    const CoefficientLaw law = pert.law(s.dim(), 2 * K);
    const FourierTruncation trunc{K, s.dim(), h};

    for (int t = 0; t < x.trials; ++t) {
      const auto t0 = Clock::now();
      OperatorMatrix m = p;
      if (delta != 0) {
        const PerturbationDraw d = sample_draw(law, {config.seed, experiment, static_cast<std::uint64_t>(t)}, h);
        m = combine(p, assemble_perturbation(d, trunc, delta));
      }
      const Eigen::VectorXcd ev = eigenvalues(m);
      const int N = count_eigenvalues(ev, gamma);
      report.trials.push_back({"semiclassical", h, t, config.seed, N, W, N - W, K,
                               opts.record_timing ? elapsed_ms(t0) : 0});
      if (opts.keep_eigenvalues) report.eigenvalues.push_back({{h, t}, ev});
    }
    per_h.push_back({{"h", h},
                     {"delta", delta},
                     {"window", {window.lower, window.upper}},
                     {"delta_floor", floor},
                     {"K", K},
                     {"truncation_checks", trunc_log}});
  }

  json& sm = report.summary;
  sm["mode"] = "semiclassical";
  sm["domain"] = describe(gamma);
  sm["weyl_measure"] = {{"value", measure.value}, {"grid", measure.grid}, {"last_delta", measure.last_delta},
                        {"xi_window", measure.xi_window}};
  sm["parameters"] = per_h;
  sm["aggregates"] = aggregate(report.trials);

  // envelope: C fitted as the largest |N - W| / envelope at the coarsest h, coverage at the others
  const double coarsest = *std::max_element(x.h_list.begin(), x.h_list.end());
  double c_hat = 0;
  for (const auto& r : report.trials)
    if (r.param == coarsest) c_hat = std::max(c_hat, std::abs(r.residual) / semiclassical_envelope(r.param));
  json coverage = json::array();
  for (double h : x.h_list) {
    int in = 0, total = 0;
    for (const auto& r : report.trials)
      if (r.param == h) {
        ++total;
        in += std::abs(r.residual) <= c_hat * semiclassical_envelope(h) ? 1 : 0;
      }
    coverage.push_back({{"h", h}, {"fraction", total ? double(in) / total : 0.0}});
  }
  sm["envelope"] = {{"C_hat", c_hat}, {"calibration_h", coarsest}, {"coverage", coverage}};

  std::vector<std::pair<double, double>> mean_abs, env_pairs;
  for (const auto& a : sm["aggregates"])
    if (a["mean_abs_residual"].get<double>() > 0) {
      mean_abs.emplace_back(a["param"].get<double>(), a["mean_abs_residual"].get<double>());
      env_pairs.emplace_back(semiclassical_envelope(a["param"].get<double>()), a["mean_abs_residual"].get<double>());
    }
  if (mean_abs.size() >= 3) {
    try {
      const PowerFit f = fit_power_law(mean_abs);
      const PowerFit g = fit_power_law(env_pairs);
      sm["fits"] = {{"residual_vs_h", {{"exponent", f.slope}, {"C", std::exp(f.intercept)}, {"r_squared", f.r_squared}}},
                    {"residual_vs_envelope",
                     {{"exponent", g.slope}, {"C", std::exp(g.intercept)}, {"r_squared", g.r_squared}}}};
    } catch (const Error&) {
      sm["fits"] = nullptr;
    }
  } else {
    sm["fits"] = nullptr;
  }
  sm["config"] = config.source;
  return report;
}

ExperimentReport run_highenergy(const ExperimentConfig& config, const RunOptions& opts) {
  const auto& x = config.experiment;
  if (x.lambda_list.empty()) throw Error(Errc::Config, "highenergy run needs experiment.lambda_list");
  const MatrixSymbol& s = config.symbol;
  const int m = s.order();
  const auto& pert = config.perturbation;
  const int a1 = pert.alpha_max;
  if (!(m - a1 - pert.rho - 0.75 > 0))
    throw Error(Errc::HypothesisViolation, "high-energy law needs m - alpha_1 - rho - 3/4 > 0");
  if (!(m - a1 > pert.rho + x.gamma1 + 0.5))
    throw Error(Errc::WindowViolation, "m - alpha_1 must exceed rho + gamma1 + 1/2");
  const SpectralDomain& gamma = config.domain();
  const auto* sector = std::get_if<AnnularSector>(&gamma.shape);
  if (!sector || sector->r_in) throw Error(Errc::Config, "highenergy domain must be a sector with inner radius 0");
  const MatrixSymbol pm = principal_symbol(s);
  validate_root_structure(pm, gamma);

  std::vector<double> lambdas = x.lambda_list;
  std::vector<int> Ks;
  std::vector<double> Ws;
  std::vector<SpectralDomain> scaled;
  json per_lambda = json::array();
  for (double lam : lambdas) {
    scaled.push_back(dilate(gamma, lam));
    const WeylMeasure wm = weyl_measure(pm, scaled.back());
    Ks.push_back(truncation_for(xi_window(s, sup_modulus(scaled.back())), 1.0, x.c_k, s.bandwidth()));
    Ws.push_back(wm.value / kTwoPi);
    per_lambda.push_back({{"lambda", lam}, {"K", Ks.back()}, {"weyl_measure", wm.value}, {"W", Ws.back()}});
  }
  const int k_q = 2 * *std::max_element(Ks.begin(), Ks.end());
  const CoefficientLaw law = pert.law(s.dim(), k_q);
  std::vector<OperatorMatrix> ps;
  for (size_t li = 0; li < lambdas.size(); ++li) ps.push_back(assemble_operator(s, {Ks[li], s.dim(), 1.0}));

  ExperimentReport report{"highenergy", {}, json::object(), {}};
  const std::uint64_t experiment = SeedSpec::label(x.label);
  json rescaling = json::array(), dyadic = json::array();
  bool rescaling_exact = true;
  for (int t = 0; t < x.trials; ++t) {
    const SeedSpec seed{config.seed, experiment, static_cast<std::uint64_t>(t)};
    const PerturbationDraw draw = sample_draw(law, seed, 1.0);
    for (size_t li = 0; li < lambdas.size(); ++li) {
      const double lam = lambdas[li];
      const auto t0 = Clock::now();
      const FourierTruncation trunc{Ks[li], s.dim(), 1.0};
      const Eigen::VectorXcd ev = eigenvalues(combine(ps[li], assemble_perturbation(draw, trunc, 1.0)));
      const int N = count_eigenvalues(ev, scaled[li]);
      report.trials.push_back({"highenergy", lam, t, config.seed, N, Ws[li], N - Ws[li], Ks[li],
                               opts.record_timing ? elapsed_ms(t0) : 0});
      if (opts.keep_eigenvalues) report.eigenvalues.push_back({{lam, t}, ev});

      if (x.check_rescaling) {
        // h^m R = 1: P0 - delta Q0 at h = lambda^{-1/m} counted in the base domain
        const double h = std::pow(lam, -1.0 / m);
        PerturbationDraw rd = draw;
        for (int a = rd.alpha_min; a <= rd.alpha_max; ++a)
          for (int i = 0; i < rd.n; ++i)
            for (int j = 0; j < rd.n; ++j)
              for (int k = -rd.k_q; k <= rd.k_q; ++k)
                rd.set(a, i, j, k, rd.coefficient(a, i, j, k) * std::pow(h, a1 - a));
        std::vector<SymbolEntry> se = s.entries();
        for (auto& e : se) e.value *= std::pow(h, m - e.alpha);
        const MatrixSymbol sh = MatrixSymbol::from_entries(s.dim(), m, se, true);
        const FourierTruncation th{Ks[li], s.dim(), h};
        const Eigen::VectorXcd ev0 =
            sorted(eigenvalues(combine(assemble_operator(sh, th), assemble_perturbation(rd, th, std::pow(h, m - a1)))));
        const Eigen::VectorXcd evs = sorted(ev);
        const int N0 = count_eigenvalues(ev0, gamma);
        double max_rel = 0;
        for (Eigen::Index e = 0; e < evs.size(); ++e)
          max_rel = std::max(max_rel, std::abs(ev0(e) * lam - evs(e)) / std::max(1.0, std::abs(evs(e))));
        rescaling_exact = rescaling_exact && N0 == N;
        rescaling.push_back({{"lambda", lam}, {"trial", t}, {"N_direct", N}, {"N_rescaled", N0},
                             {"max_rel_eig_diff", max_rel}});
      }

      const DyadicPieces pieces = dyadic_decompose(lam, *sector);
      json parts = json::array();
      auto add_piece = [&](const std::string& kind, const SpectralDomain& d) {
        parts.push_back({{"piece", kind}, {"domain", describe(d)}, {"N", count_eigenvalues(ev, d)}});
      };
      add_piece("core", pieces.core);
      for (size_t r = 0; r < pieces.rings.size(); ++r) add_piece("ring" + std::to_string(r), pieces.rings[r]);
      add_piece("cap", pieces.cap);
      dyadic.push_back({{"lambda", lam}, {"trial", t}, {"k0", pieces.k0}, {"pieces", parts}});
    }
  }

  json& sm = report.summary;
  sm["mode"] = "highenergy";
  sm["domain"] = describe(gamma);
  sm["parameters"] = per_lambda;
  sm["aggregates"] = aggregate(report.trials);
  sm["rescaling"] = {{"exact", rescaling_exact}, {"checks", rescaling}};
  sm["dyadic"] = dyadic;

  // per-trajectory constants: C_tilde from the median envelope ratio, C(omega) the remaining excess
  std::vector<double> ratios;
  for (const auto& r : report.trials)
    if (r.param > 1) ratios.push_back(std::abs(r.residual) / highenergy_envelope(r.param, m));
  double c_tilde = 0;
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    c_tilde = ratios[ratios.size() / 2];
  }
  json per_omega = json::array();
  for (int t = 0; t < x.trials; ++t) {
    double c = 0;
    json rel = json::array();
    for (const auto& r : report.trials) {
      if (r.trial != t) continue;
      const double env = r.param > 1 ? highenergy_envelope(r.param, m) : 0.0;
      c = std::max(c, std::abs(r.residual) - c_tilde * env);
      rel.push_back({{"lambda", r.param}, {"relative_residual", r.W > 0 ? std::abs(r.residual) / r.W : 0.0}});
    }
    per_omega.push_back({{"trial", t}, {"C_omega", c}, {"relative_residuals", rel}});
  }
  sm["envelope"] = {{"C_tilde", c_tilde}, {"per_trajectory", per_omega}};
  sm["config"] = config.source;
  return report;
}

}  // namespace rwl
