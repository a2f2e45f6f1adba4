#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rwl/config.hpp"
#include "rwl/discretize.hpp"
#include "rwl/harness.hpp"
#include "rwl/linalg.hpp"
#include "rwl/quasimode.hpp"
#include "rwl/weyl_measure.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rwl;

namespace {

std::vector<double> split_numbers(const std::string& s, const std::string& seps) {
  std::vector<double> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) throw Error(Errc::Config, "malformed numeric list '" + s + "'");
    try {
      size_t used = 0;
      out.push_back(std::stod(cur, &used));
      if (used != cur.size()) throw std::invalid_argument(cur);
    } catch (const std::exception&) {
      throw Error(Errc::Config, "malformed number '" + cur + "'");
    }
    cur.clear();
  };
  for (char c : s) {
    if (seps.find(c) != std::string::npos) flush();
    else cur.push_back(c);
  }
  flush();
  return out;
}

Complex parse_z(const std::string& s) {
  const auto v = split_numbers(s, ",");
  if (v.size() != 2) throw Error(Errc::Config, "z must be RE,IM");
  return {v[0], v[1]};
}

std::pair<int, int> parse_grid_size(const std::string& s) {
  const auto v = split_numbers(s, "x");
  if (v.size() != 2 || v[0] < 1 || v[1] < 1) throw Error(Errc::Config, "grid must be NxM");
  return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot write " + p.string());
  return f;
}

const char* region_name(Region r) {
  switch (r) {
    case Region::OutsideSigma: return "outside_sigma";
    case Region::InLambda: return "lambda";
    case Region::NearPhi: return "near_phi";
  }
  return "?";
}

json inventory_json(const RootInventory& inv) {
  json roots = json::array();
  for (const auto& r : inv.roots)
    roots.push_back({{"x", r.point.x}, {"xi", r.point.xi}, {"sign", r.sign == RootSign::Plus ? "+" : "-"},
                     {"bracket", r.bracket}, {"degenerate", r.degenerate}});
  return {{"z", {inv.z.real(), inv.z.imag()}}, {"beta", inv.beta}, {"gamma", inv.gamma},
          {"degenerate", inv.degenerate}, {"roots", roots}};
}

int default_K(const ExperimentConfig& c, double h) {
  const double xi = xi_window(c.symbol, c.domains.empty() ? 1.0 : sup_modulus(c.domain()));
  return static_cast<int>(std::ceil(c.experiment.c_k * xi / h)) + 2 * c.symbol.bandwidth();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random perturbations of non-selfadjoint operators on the circle: Weyl-law experiments"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  std::string config_path, out, z_text, grid_text, domain_name, box_text;
  double h = 0.1, delta = 0;
  int K = 0, trial = 0, samples = 4096;
  std::uint64_t seed = 0;
  bool dump_eigs = false, timing = false;

  auto with_config = [&](CLI::App* sub) { sub->add_option("--config", config_path, "JSON config")->required(); };

  auto* scan = app.add_subcommand("symbol-scan", "classify a z-grid into Sigma-complement / Phi / Lambda");
  with_config(scan);
  scan->add_option("--grid", grid_text, "NxM")->required();
  scan->add_option("--box", box_text, "RE0,RE1,IM0,IM1 (default: bounding box of the domain)");
  scan->add_option("--domain", domain_name);
  scan->add_option("--out", out)->required();

  auto* roots = app.add_subcommand("roots", "root inventory of q_z as JSON");
  with_config(roots);
  roots->add_option("--z", z_text)->required();

  auto* weyl = app.add_subcommand("weyl", "Weyl measure and predicted counts");
  with_config(weyl);
  weyl->add_option("--domain", domain_name);

  auto* assemble = app.add_subcommand("assemble", "export the truncated operator matrix");
  with_config(assemble);
  assemble->add_option("--h", h)->required();
  assemble->add_option("--K", K)->required();
  assemble->add_option("--out", out)->required();

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of P - delta Q for one draw");
  with_config(spectrum);
  spectrum->add_option("--h", h)->required();
  spectrum->add_option("--K", K, "truncation (default: the run rule)");
  spectrum->add_option("--delta", delta);
  auto* seed_opt = spectrum->add_option("--seed", seed);
  spectrum->add_option("--trial", trial);
  spectrum->add_option("--out", out)->required();

  auto* pseudo = app.add_subcommand("pseudospec", "sigma_min(P_K - z) on a grid");
  with_config(pseudo);
  pseudo->add_option("--h", h)->required();
  pseudo->add_option("--K", K);
  pseudo->add_option("--grid", grid_text, "RE0,RE1,IM0,IM1,NxM")->required();
  pseudo->add_option("--out", out)->required();

  auto* quasi = app.add_subcommand("quasimode", "WKB quasimode at the plus-roots of q_z");
  with_config(quasi);
  quasi->add_option("--z", z_text)->required();
  quasi->add_option("--h", h)->required();
  quasi->add_option("--K", K);
  quasi->add_option("--samples", samples);
  quasi->add_option("--out", out)->required();

  auto* mc_sc = app.add_subcommand("mc-semiclassical", "semiclassical Weyl-law experiment");
  auto* mc_he = app.add_subcommand("mc-highenergy", "high-energy Weyl-law experiment");
  for (auto* sub : {mc_sc, mc_he}) {
    with_config(sub);
    sub->add_option("--out", out)->required();
    sub->add_flag("--dump-eigs", dump_eigs, "write eigenvalues.csv");
    sub->add_flag("--timing", timing, "fill the millis column");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const ExperimentConfig cfg = load_config(config_path);
    const MatrixSymbol& s = cfg.symbol;

    if (*scan) {
      const auto [nr, ni] = parse_grid_size(grid_text);
      Rectangle box{};
      if (!box_text.empty()) {
        const auto v = split_numbers(box_text, ",");
        if (v.size() != 4) throw Error(Errc::Config, "--box needs RE0,RE1,IM0,IM1");
        box = {v[0], v[1], v[2], v[3]};
      } else {
        box = bounding_box(cfg.domain(domain_name));
      }
      const fs::path dir(out);
      auto f = open_out(dir / "region_map.csv");
      f << "re,im,region,beta,gamma\n";
      for (int a = 0; a < nr; ++a)
        for (int b = 0; b < ni; ++b) {
          const double re = nr == 1 ? box.re_min : box.re_min + (box.re_max - box.re_min) * a / (nr - 1);
          const double im = ni == 1 ? box.im_min : box.im_min + (box.im_max - box.im_min) * b / (ni - 1);
          const RegionClass rc = classify_region(s, {re, im});
          f << format_double(re) << ',' << format_double(im) << ',' << region_name(rc.region) << ','
            << rc.inventory.beta << ',' << rc.inventory.gamma << '\n';
        }
    } else if (*roots) {
      std::cout << inventory_json(find_roots(s, parse_z(z_text))).dump(2) << '\n';
    } else if (*weyl) {
      const SpectralDomain& d = cfg.domain(domain_name);
      const WeylMeasure wm = weyl_measure(s, d);
      json j{{"domain", describe(d)}, {"measure", wm.value}, {"grid", wm.grid}, {"xi_window", wm.xi_window}};
      if (s.semiclassical()) {
        json pred = json::array();
        for (double hh : cfg.experiment.h_list) pred.push_back({{"h", hh}, {"W", wm.value / (kTwoPi * hh)}});
        j["predictions"] = pred;
      } else {
        j["W"] = wm.value / kTwoPi;
      }
      std::cout << j.dump(2) << '\n';
    } else if (*assemble) {
      auto f = open_out(out);
      write_matrix(f, assemble_operator(s, {K, s.dim(), h}));
    } else if (*spectrum) {
      if (!*seed_opt) seed = cfg.seed;
      if (K == 0) K = default_K(cfg, h);
      const FourierTruncation trunc{K, s.dim(), h};
      OperatorMatrix m = assemble_operator(s, trunc);
      if (delta != 0) {
        const CoefficientLaw law = cfg.perturbation.law(s.dim(), 2 * K);
        const PerturbationDraw d =
            sample_draw(law, {seed, SeedSpec::label("spectrum"), static_cast<std::uint64_t>(trial)}, h);
        m = combine(m, assemble_perturbation(d, trunc, delta));
      }
      const Eigen::VectorXcd ev = sorted(eigenvalues(m));
      const fs::path dir(out);
      auto f = open_out(dir / "eigenvalues.csv");
      f << "re,im\n";
      for (Eigen::Index i = 0; i < ev.size(); ++i)
        f << format_double(ev(i).real()) << ',' << format_double(ev(i).imag()) << '\n';
      json counts = json::object();
      for (const auto& [name, d] : cfg.domains) counts[name] = count_eigenvalues(ev, d);
      auto js = open_out(dir / "spectrum.json");
      js << json{{"h", h}, {"K", K}, {"delta", delta}, {"seed", seed}, {"trial", trial}, {"counts", counts}}.dump(2)
         << '\n';
    } else if (*pseudo) {
      const auto v = split_numbers(grid_text.substr(0, grid_text.rfind(',')), ",");
      if (v.size() != 4) throw Error(Errc::Config, "--grid needs RE0,RE1,IM0,IM1,NxM");
      const auto [nr, ni] = parse_grid_size(grid_text.substr(grid_text.rfind(',') + 1));
      if (K == 0) K = default_K(cfg, h);
      const ZGrid g{v[0], v[1], nr, v[2], v[3], ni};
      const Eigen::MatrixXd map = sigma_min_map(s, {K, s.dim(), h}, g);
      auto f = open_out(fs::path(out) / "sigma_min.csv");
      f << "re,im,sigma_min\n";
      for (int a = 0; a < nr; ++a)
        for (int b = 0; b < ni; ++b) {
          const Complex z = g.at(a, b);
          f << format_double(z.real()) << ',' << format_double(z.imag()) << ',' << format_double(map(a, b)) << '\n';
        }
    } else if (*quasi) {
      const Complex z = parse_z(z_text);
      const RootInventory inv = find_roots(s, z);
      if (K == 0) K = default_K(cfg, h);
      const OperatorMatrix m = shifted(assemble_operator(s, {K, s.dim(), h}), z);
      const fs::path dir(out);
      json info = json::array();
      int idx = 0;
      for (const auto& r : inv.plus()) {
        const Quasimode q = build_quasimode(s, z, r.point, h, samples);
        auto f = open_out(dir / ("quasimode_" + std::to_string(idx) + ".csv"));
        f << "x";
        for (int c = 0; c < s.dim(); ++c) f << ",re" << c << ",im" << c;
        f << '\n';
        for (int j = 0; j < q.grid_size(); ++j) {
          f << format_double(kTwoPi * j / q.grid_size());
          for (int c = 0; c < s.dim(); ++c)
            f << ',' << format_double(q.samples(c, j).real()) << ',' << format_double(q.samples(c, j).imag());
          f << '\n';
        }
        info.push_back({{"root", {r.point.x, r.point.xi}}, {"plateau_radius", q.plateau_radius},
                        {"support_radius", q.support_radius}, {"edge_imag", q.edge_imag},
                        {"residual", residual(m, q)}, {"K", K}});
        ++idx;
      }
      auto js = open_out(dir / "quasimode.json");
      js << json{{"z", {z.real(), z.imag()}}, {"h", h}, {"quasimodes", info}}.dump(2) << '\n';
    } else {
      const RunOptions opts{timing, dump_eigs};
      const ExperimentReport rep = *mc_sc ? run_semiclassical(cfg, opts) : run_highenergy(cfg, opts);
      write_report(rep, out);
    }
  } catch (const Error& e) {
    std::cerr << "rwl: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "rwl: Io: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
