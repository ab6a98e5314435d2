#include "tfw/runner.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace tfw {

namespace {

using experiments::ErrorReport;
using nlohmann::ordered_json;

ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json fit_json(const experiments::RateFit& f) {
  return {{"slope", number(f.slope)},
          {"intercept", number(f.intercept)},
          {"ci_low", number(f.ci_low)},
          {"ci_high", number(f.ci_high)},
          {"n_points", f.n_points}};
}

ordered_json report_json(const ErrorReport& r) {
  ordered_json j;
  j["study"] = r.study;
  j["status"] = r.passed() ? "PASS" : "FAIL";
  j["param_name"] = r.param_name;
  j["fit"] = r.fit ? fit_json(*r.fit) : ordered_json(nullptr);
  j["fit_corrected"] = r.fit_corrected ? fit_json(*r.fit_corrected) : ordered_json(nullptr);
  ordered_json checks = ordered_json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"value", number(c.value)},
                      {"low", number(c.low)},
                      {"high", number(c.high)},
                      {"pass", c.pass}});
  j["checks"] = checks;
  ordered_json metrics = ordered_json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = number(v);
  j["metrics"] = metrics;
  int n = 0;
  for (const auto& l : r.ladder) n = std::max(n, l.n_samples);
  j["n_samples"] = n;
  return j;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  os << text;
  if (!os) throw std::runtime_error("write to '" + p.string() + "' failed");
}

template <class Opts>
Opts with_mc(Opts o, const RunConfig& cfg, int threads) {
  o.mc = cfg.mc;
  o.mc.threads = threads;
  return o;
}

}  // namespace

std::vector<ErrorReport> run_study(const RunConfig& cfg, int threads) {
  using namespace experiments;
  if (cfg.study == "modeling-error") return {modeling_error_study(cfg.model, with_mc(cfg.modeling, cfg, threads))};
  if (cfg.study == "fem-error") {
    std::vector<ErrorReport> out{fem_error_study(cfg.model, with_mc(cfg.fem, cfg, threads))};
    if (cfg.total_error) out.push_back(total_error_study(cfg.model, with_mc(cfg.total, cfg, threads)));
    return out;
  }
  if (cfg.study == "holder") return {holder_probe(cfg.model, with_mc(cfg.holder, cfg, threads))};
  if (cfg.study == "stability") return {stability_probe(cfg.stability)};
  if (cfg.study == "special-selftest") return {special_selftest()};
  throw std::invalid_argument("unknown study '" + cfg.study + "'");
}

std::string summary_json(const RunConfig& cfg, const std::vector<ErrorReport>& reports) {
  ordered_json j;
  j["study"] = cfg.study;
  j["seed"] = cfg.mc.seed;
  bool pass = true;
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) {
    pass = pass && r.passed();
    arr.push_back(report_json(r));
  }
  j["status"] = pass ? "PASS" : "FAIL";
  j["reports"] = arr;
  return j.dump(2) + "\n";
}

int run(const RunConfig& cfg, const std::string& out_dir, int threads, std::ostream& log) {
  const auto reports = run_study(cfg, threads);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / (cfg.study + ".csv"), experiments::to_csv(reports));
  if (experiments::has_companions(reports))
    write_file(dir / (cfg.study + "_companions.csv"), experiments::companions_csv(reports));
  write_file(dir / (cfg.study + "_timing.csv"), experiments::timing_csv(reports));
  write_file(dir / "summary.json", summary_json(cfg, reports));

  bool pass = true;
  for (const auto& r : reports) {
    for (const auto& c : r.checks)
      log << r.study << "  " << c.name << " = " << c.value << "  [" << c.low << ", " << c.high << "]  "
          << (c.pass ? "ok" : "FAIL") << '\n';
    if (r.fit) log << r.study << "  slope " << r.fit->slope << "  CI [" << r.fit->ci_low << ", " << r.fit->ci_high << "]\n";
    log << r.study << ": " << (r.passed() ? "PASS" : "FAIL") << '\n';
    pass = pass && r.passed();
  }
  return pass ? 0 : 2;
}

}  // namespace tfw
