#include <Eigen/Core>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>

#include "rwl/harness.hpp"

namespace rwl {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

json aggregate(const std::vector<TrialRecord>& trials) {
  std::vector<double> order;
  std::map<double, std::vector<const TrialRecord*>> groups;
  for (const auto& r : trials) {
    if (!groups.count(r.param)) order.push_back(r.param);
    groups[r.param].push_back(&r);
  }
  json out = json::array();
  for (double param : order) {
    const auto& g = groups[param];
    double sum_n = 0, sum_w = 0, sum_ratio = 0, sum_abs = 0;
    std::vector<double> abs_res;
    int ratio_count = 0;
    for (const auto* r : g) {
      sum_n += r->N;
      sum_w += r->W;
      if (r->W > 0) {
        sum_ratio += r->N / r->W;
        ++ratio_count;
      }
      sum_abs += std::abs(r->residual);
      abs_res.push_back(std::abs(r->residual));
    }
    const double cnt = static_cast<double>(g.size());
    out.push_back({{"param", param},
                   {"trials", g.size()},
                   {"mean_N", sum_n / cnt},
                   {"mean_W", sum_w / cnt},
                   {"mean_ratio", ratio_count ? sum_ratio / ratio_count : 0.0},
                   {"mean_abs_residual", sum_abs / cnt},
                   {"q50_abs_residual", quantile(abs_res, 0.5)},
                   {"q90_abs_residual", quantile(abs_res, 0.9)}});
  }
  return out;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  auto open = [&](const char* name) {
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw Error(Errc::Io, "cannot write " + (out_dir / name).string());
    return f;
  };

  {
    std::ofstream f = open("trials.csv");
    f << "mode,h_or_lambda,trial,seed,N,W,residual,K,millis\n";
    for (const auto& r : report.trials)
      f << r.mode << ',' << format_double(r.param) << ',' << r.trial << ',' << r.seed << ',' << r.N << ','
        << format_double(r.W) << ',' << format_double(r.residual) << ',' << r.K << ',' << r.millis << '\n';
  }
  {
    json sm = report.summary;
    sm["versions"] = {{"rwl", "0.1.0"},
                      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                    "." + std::to_string(EIGEN_MINOR_VERSION)},
                      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    std::ofstream f = open("summary.json");
    f << sm.dump(2) << '\n';
  }
  if (!report.eigenvalues.empty()) {
    std::ofstream f = open("eigenvalues.csv");
    f << "h_or_lambda,trial,re,im\n";
    for (const auto& [key, ev] : report.eigenvalues)
      for (Eigen::Index i = 0; i < ev.size(); ++i)
        f << format_double(key.first) << ',' << key.second << ',' << format_double(ev(i).real()) << ','
          << format_double(ev(i).imag()) << '\n';
  }
}

}  // namespace rwl
