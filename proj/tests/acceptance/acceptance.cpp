// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance [--tfwave PATH] [--configs DIR] [--work DIR] [--threads N] [--only 1,3,...]
//
// Criteria 5-8 run the shipped configs in-process. Criterion 10 re-runs every
// config through the CLI (or in-process when --tfwave is absent) with
// --threads 1 and --threads 8 and compares the outputs byte for byte.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tfw/config.hpp"
#include "tfw/experiments.hpp"
#include "tfw/fem.hpp"
#include "tfw/kernels.hpp"
#include "tfw/noise.hpp"
#include "tfw/runner.hpp"
#include "tfw/solver.hpp"
#include "tfw/special.hpp"

namespace fs = std::filesystem;
using namespace tfw;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

struct Settings {
  std::string tfwave;
  fs::path configs;
  fs::path work;
  int threads = 8;
};

// Streaming mean and standard error.
struct Stat {
  double sum = 0.0, sum_sq = 0.0;
  long n = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return sum / n; }
  double se() const {
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum_sq / n - m * m)) * n / (n - 1) / n);
  }
  bool within(double target, double k = 3.0) const { return std::fabs(mean() - target) <= k * se(); }
};

double fgn_cov(int lag, double hurst) {
  const double k = std::abs(lag);
  return 0.5 * (std::pow(k + 1, 2 * hurst) + std::pow(std::fabs(k - 1), 2 * hurst) - 2 * std::pow(k, 2 * hurst));
}

double untempered_S(double alpha, double lam, double t) {
  return t <= 0.0 ? 0.0 : std::pow(t, alpha - 1) * special::ml(alpha, alpha, -lam * std::pow(t, alpha));
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome ac1(const Settings&) {
  Outcome o;
  double exp_rel = 0.0, cos_abs = 0.0, d_rel = 0.0, i_rel = 0.0, decay = 0.0;
  for (int i = 0; i <= 1500; ++i) {
    const double x = -10.0 + 15.0 * i / 1500;
    exp_rel = std::max(exp_rel, std::fabs(special::ml(1.0, 1.0, x) - std::exp(x)) / std::exp(x));
  }
  for (int i = 0; i <= 1200; ++i) {
    const double x = 6.0 * i / 1200;
    cos_abs = std::max(cos_abs, std::fabs(special::ml(2.0, 1.0, -x * x) - std::cos(x)));
  }
  for (double a : {1.6, 1.8, 1.9})
    for (double lam : {1.0, 10.0})
      for (int i = 1; i <= 50; ++i) {
        const double t = 0.1 * i, h = 1e-5 * t;
        auto e1 = [&](double s) { return special::ml(a, 1.0, -lam * std::pow(s, a)); };
        auto te2 = [&](double s) { return s * special::ml(a, 2.0, -lam * std::pow(s, a)); };
        const double d_exact = -lam * std::pow(t, a - 1) * special::ml(a, a, -lam * std::pow(t, a));
        const double i_exact = e1(t);
        d_rel = std::max(d_rel, std::fabs((e1(t + h) - e1(t - h)) / (2 * h) - d_exact) / std::max(std::fabs(d_exact), 1e-2));
        i_rel = std::max(i_rel, std::fabs((te2(t + h) - te2(t - h)) / (2 * h) - i_exact) / std::max(std::fabs(i_exact), 1e-2));
      }
  for (double a : {1.55, 1.7, 1.8, 1.9, 1.95})
    for (double b : {1.0, 2.0, a})
      for (int i = 0; i <= 600; ++i) {
        const double z = -std::pow(10.0, -2.0 + 6.0 * i / 600);
        decay = std::max(decay, std::fabs(special::ml(a, b, z)) * (1 + std::fabs(z)));
      }
  o.require(exp_rel <= 1e-12, "exp");
  o.require(cos_abs <= 1e-10, "cos");
  o.require(d_rel <= 1e-6, "derivative identity");
  o.require(i_rel <= 1e-6, "integral identity");
  o.require(decay <= 300.0, "decay");
  const auto self = experiments::special_selftest();
  o.require(self.passed(), "selftest");
  o.detail << "E11-exp rel " << exp_rel << ", E21-cos abs " << cos_abs << ", d/dt identities " << d_rel << " / "
           << i_rel << ", sup|E|(1+|z|) " << decay << " <= 300";
  return o;
}

Outcome ac2(const Settings&) {
  Outcome o;
  const int n = 256, paths = 100000;
  const double H = 0.75, tau = 1.0 / n;
  const std::vector<double> f{1.0, -0.5, 2.0, 0.7}, g{0.3, 1.0, -1.0, 0.5};  // steps on quarters

  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> node(0, n);
  std::uniform_real_distribution<double> phi_d(-2.0, 2.0);
  struct Triple {
    int i1, i2;
    double phi;
  };
  std::vector<Triple> triples;
  while (triples.size() < 100) {
    int a = node(rng), b = node(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    triples.push_back({a, b, phi_d(rng)});
  }

  Stat var1, bb1, bb2, white_xy, fgn_xy, white_x, fgn_x;
  std::vector<Stat> lag(4), lemma(triples.size());
  std::vector<double> cum(n + 1);
  for (int s = 0; s < paths; ++s) {
    const NoisePath p = noise::sample_path(1, n, tau, H, 77, s);
    cum[0] = 0.0;
    for (int i = 0; i < n; ++i) cum[i + 1] = cum[i] + p.fbm_incr(0, i);
    var1.add(cum[n] * cum[n]);
    bb1.add(cum[n / 4] * cum[3 * n / 4]);
    bb2.add(cum[n / 2] * cum[n]);
    for (int k = 0; k < 4; ++k) lag[k].add(p.fbm_incr(0, n / 2) * p.fbm_incr(0, n / 2 + k));
    double xw = 0.0, yw = 0.0, xf = 0.0, yf = 0.0;
    for (int i = 0; i < n; ++i) {
      const int q = 4 * i / n;
      xw += f[q] * p.bm_incr(0, i);
      yw += g[q] * p.bm_incr(0, i);
      xf += f[q] * p.fbm_incr(0, i);
      yf += g[q] * p.fbm_incr(0, i);
    }
    white_xy.add(xw * yw);
    fgn_xy.add(xf * yf);
    white_x.add(xw);
    fgn_x.add(xf);
    for (std::size_t t = 0; t < triples.size(); ++t) {
      const double d = triples[t].phi * (cum[triples[t].i2] - cum[triples[t].i1]);
      lemma[t].add(d * d);
    }
  }

  auto cov_bm = [H](double t, double s) {
    return 0.5 * (std::pow(t, 2 * H) + std::pow(s, 2 * H) - std::pow(std::fabs(t - s), 2 * H));
  };
  o.require(var1.within(1.0) && std::fabs(var1.mean() - 1.0) <= 0.02, "Var B^H(1)");
  o.require(bb1.within(cov_bm(0.25, 0.75)), "Cov B^H(1/4) B^H(3/4)");
  o.require(bb2.within(cov_bm(0.5, 1.0)), "Cov B^H(1/2) B^H(1)");
  double worst_lag = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double target = std::pow(tau, 2 * H) * fgn_cov(k, H);
    worst_lag = std::max(worst_lag, std::fabs(lag[k].mean() - target) / lag[k].se());
    o.require(lag[k].within(target), "increment covariance lag " + std::to_string(k));
  }

  // H(2H-1) sum_ab f_a g_b int_A int_B |s - r|^{2H-2} dr ds, by nested tanh-sinh.
  boost::math::quadrature::tanh_sinh<double> ts;
  auto block = [&](double a0, double a1, double b0, double b1) {
    auto power = [H](double d) { return d > 0.0 ? std::pow(d, 2 * H - 2) : 0.0; };
    return ts.integrate(
        [&](double s) {
          if (s > b0 && s < b1) {
            // The complement argument carries the distance to the singular endpoint r = s exactly.
            const double left = ts.integrate([&](double r, double rc) { return power(r > 0.5 * (b0 + s) ? rc : s - r); }, b0, s);
            const double right = ts.integrate([&](double r, double rc) { return power(r < 0.5 * (s + b1) ? -rc : r - s); }, s, b1);
            return left + right;
          }
          return ts.integrate([&](double r) { return power(std::fabs(s - r)); }, b0, b1);
        },
        a0, a1);
  };
  double dbl = 0.0, white_exact = 0.0;
  for (int a = 0; a < 4; ++a) {
    white_exact += f[a] * g[a] * 0.25;
    for (int b = 0; b < 4; ++b) dbl += f[a] * g[b] * block(0.25 * a, 0.25 * (a + 1), 0.25 * b, 0.25 * (b + 1));
  }
  const double fgn_exact = H * (2 * H - 1) * dbl;
  o.require(white_xy.within(white_exact), "white-noise isometry");
  o.require(fgn_xy.within(fgn_exact), "fGn double integral");
  o.require(white_x.within(0.0) && fgn_x.within(0.0), "zero mean");

  int violated = 0;
  double worst_ratio = 0.0;
  for (std::size_t t = 0; t < triples.size(); ++t) {
    const double len = (triples[t].i2 - triples[t].i1) * tau;
    const double bound = 2 * H * std::pow(len, 2 * H - 1) * triples[t].phi * triples[t].phi * len;
    worst_ratio = std::max(worst_ratio, lemma[t].mean() / bound);
    if (lemma[t].mean() > bound) ++violated;
  }
  o.require(violated == 0, "fGn integral bound");
  o.detail << paths << " paths: Var B^H(1) " << var1.mean() << " +- " << var1.se() << ", worst fGn lag z " << worst_lag
           << ", fGn E[XY] " << fgn_xy.mean() << " vs " << fgn_exact << " (se " << fgn_xy.se() << "), white E[XY] "
           << white_xy.mean() << " vs " << white_exact << ", bound violations " << violated << "/100 (max ratio "
           << worst_ratio << ")";
  return o;
}

Outcome ac3(const Settings&) {
  Outcome o;
  ModelSpec m = benchmark_model();
  m.f_spec = {};
  m.g_spec = {};
  m.h_spec = {};
  m.init_b = Vec::LinSpaced(m.n_modes, 0.4, -0.4);
  m.normalize_initial_data();
  const int n = 1 << 9;
  const NoisePath p = noise::sample_path(m.n_modes, n, m.horizon / n, m.hurst, 5);
  const RowMat u = solver::solve_regularized(m, p).coeffs;
  // Per-mode closed form assembled here from the kernels.
  const Vec lam = m.lambda_beta();
  double worst = 0.0;
  for (int j = 0; j <= n; ++j)
    for (int k = 0; k < m.n_modes; ++k) {
      const kernels::ModeKernelCtx c{lam[k], m.alpha, m.nu};
      const double t = j * m.horizon / n;
      const double exact = m.init_a[k] * kernels::eval_T(c, t) + m.init_b[k] * kernels::eval_R(c, t);
      worst = std::max(worst, std::fabs(u(j, k) - exact));
    }
  o.require(worst <= 1e-10, "exactness");
  o.detail << "K=" << m.n_modes << ", N=" << n << ", max |u - closed form| " << worst;
  return o;
}

// Endpoint variance of a single-mode additive-noise solve plus its oracles.
struct VarianceCheck {
  Stat mc;
  double discrete = 0.0, discrete_half = 0.0, discrete_double = 0.0, continuum = 0.0;
};

Outcome ac4(const Settings&) {
  Outcome o;
  const int n = 256, paths = 10000;
  for (bool fractional : {false, true}) {
    ModelSpec m = benchmark_model();
    m.f_spec = {};
    m.g_spec = {};
    m.h_spec = {};
    m.n_modes = 1;
    m.nu = 0.0;
    m.init_a = Vec::Zero(1);
    m.init_b = Vec::Zero(1);
    const double c = fractional ? 1.3 : 0.8;
    NonlinearitySpec add;
    add.kind = NonlinearityKind::diagonal_multiplicative;
    add.c0 = c;
    (fractional ? m.h_spec : m.g_spec) = add;
    const double lam = m.lambda_beta()[0], a = m.alpha, T = m.horizon, H = m.hurst;
    const double coef = fractional ? m.noise_coeffs.rho.approx(1, 0.0) : m.noise_coeffs.sigma.approx(1, 0.0);
    const double amp = c * c * coef * coef;

    auto discrete = [&](int steps) {
      const double tau = T / steps;
      std::vector<double> w(steps);
      for (int j = 1; j <= steps; ++j) w[j - 1] = kernels::conv_weight({lam, a, 0.0}, j * tau, (j - 1) * tau);
      double acc = 0.0;
      if (!fractional) {
        for (double v : w) acc += v * v;
        return amp * acc / tau;
      }
      for (int i = 0; i < steps; ++i)
        for (int j = 0; j < steps; ++j) acc += w[i] * w[j] * fgn_cov(i - j, H);
      return amp * acc * std::pow(tau, 2 * H - 2);
    };

    double cont = 0.0;
    if (!fractional) {
      cont = amp * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                       [&](double x) { return std::pow(untempered_S(a, lam, x), 2); }, 0.0, T, 15, 1e-13);
    } else {
      boost::math::quadrature::tanh_sinh<double> inner;
      const double dbl = 2.0 * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                                   [&](double x) {
                                     if (x <= 0.0) return 0.0;
                                     return untempered_S(a, lam, x) *
                                            inner.integrate(
                                                [&](double y) {
                                                  return untempered_S(a, lam, y) * std::pow(x - y, 2 * H - 2);
                                                },
                                                0.0, x);
                                   },
                                   0.0, T, 8, 1e-11);
      cont = H * (2 * H - 1) * amp * dbl;
    }

    auto table = solver::make_table(m, T / n, n);
    Stat sq, mean;
    std::vector<double> x(paths);
    for (int s = 0; s < paths; ++s) {
      const NoisePath p = noise::sample_path(1, n, T / n, H, fractional ? 43 : 41, s);
      x[s] = solver::solve_regularized(m, p, table).coeffs(n, 0);
      mean.add(x[s]);
    }
    for (double v : x) sq.add((v - mean.mean()) * (v - mean.mean()));
    const double d = discrete(n), d_half = discrete(n / 2), d_double = discrete(2 * n);
    const double bias = std::fabs(d - cont);
    const std::string tag = fractional ? "fGn" : "white";
    o.require(std::fabs(sq.mean() - cont) <= 3 * sq.se() + bias, tag + " variance");
    o.require(std::fabs(sq.mean() - d) <= 3 * sq.se(), tag + " discrete variance");
    o.require(std::fabs(d_double - cont) < std::fabs(d - cont) && std::fabs(d - cont) < std::fabs(d_half - cont),
              tag + " bias shrinks under halving");
    o.require(bias < sq.se(), tag + " bias below sampling error");
    o.detail << tag << ": mc " << sq.mean() << " +- " << sq.se() << ", oracle " << cont << ", bias N/2,N,2N "
             << d_half - cont << ", " << d - cont << ", " << d_double - cont << "; ";
  }
  o.detail << paths << " paths, N=" << n;
  return o;
}

// Runs one config in-process into work/<tag>; returns the parsed summary.
nlohmann::json run_config(const Settings& st, const std::string& file, const std::string& tag, int& code) {
  RunConfig cfg = load_config((st.configs / file).string());
  const fs::path out = st.work / "runs" / tag;
  fs::remove_all(out);
  std::ostringstream log;
  code = tfw::run(cfg, out.string(), st.threads, log);
  return nlohmann::json::parse(slurp(out / "summary.json"));
}

std::string describe(const nlohmann::json& summary) {
  std::ostringstream os;
  for (const auto& r : summary["reports"]) {
    os << r["study"].get<std::string>() << ":";
    if (!r["fit"].is_null()) os << " slope " << r["fit"]["slope"].get<double>();
    if (!r["fit_corrected"].is_null()) os << " (corrected " << r["fit_corrected"]["slope"].get<double>() << ")";
    for (const auto& c : r["checks"])
      if (!c["value"].is_null())
        os << ", " << c["name"].get<std::string>() << " " << c["value"].get<double>() << (c["pass"].get<bool>() ? "" : " FAIL");
    os << ", n " << r["n_samples"].get<int>() << "; ";
  }
  return os.str();
}

Outcome ac_study(const Settings& st, const std::vector<std::pair<std::string, std::string>>& runs) {
  Outcome o;
  for (const auto& [file, tag] : runs) {
    int code = 0;
    const auto summary = run_config(st, file, tag, code);
    o.require(code == 0 && summary["status"] == "PASS", tag);
    o.detail << describe(summary);
  }
  return o;
}

Outcome ac9(const Settings&) {
  Outcome o;
  const std::vector<double> hs{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  const double beta = 0.9;
  Vec phi1 = Vec::Zero(1);
  phi1[0] = 1.0;
  std::vector<double> e_p, e_r, inv;
  for (double h : hs) {
    const fem::FemSpace s = fem::build_space(h, 1.0, beta);
    e_p.push_back(std::sqrt(fem::l2_error_sq(s.coupling(1), phi1, fem::modal_coeffs(s, fem::project_L2(s, phi1)))));
    e_r.push_back(std::sqrt(fem::l2_error_sq(s.coupling(1), phi1, fem::modal_coeffs(s, fem::project_ritz(s, phi1)))));
    inv.push_back(fem::inverse_inequality_probe(s, 0.0, beta));
  }
  const double rate_p = experiments::fit_rate(hs, e_p).slope, rate_r = experiments::fit_rate(hs, e_r).slope;
  o.require(std::fabs(rate_p - 2.0) <= 0.15, "P_h rate");
  o.require(std::fabs(rate_r - 2.0) <= 0.15, "R_h rate");
  const auto [lo, hi] = std::minmax_element(inv.begin(), inv.end());
  o.require(*hi < 2.0 * *lo, "inverse inequality");

  const fem::FemSpace s = fem::build_space(1.0 / 32, 1.0, beta);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  double norm_gap = 0.0;
  for (int r = 0; r < 20; ++r) {
    Vec x(s.n_dofs);
    for (auto& v : x) v = nd(rng);
    const double l2 = std::sqrt(x.dot(s.mass * x)), en = std::sqrt(x.dot(s.frac_stiff * x));
    norm_gap = std::max({norm_gap, std::fabs(fem::discrete_norm(s, x, 0.0) - l2) / l2,
                         std::fabs(fem::discrete_norm(s, x, beta) - en) / en});
  }
  o.require(norm_gap <= 1e-10, "discrete norms");

  double ident = 0.0;
  const int quarter = s.n_dofs / 4;
  const Vec lb = frac_eigenvalues(quarter, 1.0, beta);
  for (int j = 0; j < quarter; ++j) {
    Vec e = Vec::Zero(quarter);
    e[j] = 1.0;
    const Vec rhs = fem::project_L2(s, lb[j] * e);
    ident = std::max(ident, (fem::discrete_frac_apply(s, fem::project_ritz(s, e)) - rhs).cwiseAbs().maxCoeff() /
                                std::max(1.0, rhs.cwiseAbs().maxCoeff()));
  }
  o.require(ident <= 1e-8, "intertwining identity");
  o.detail << "P_h rate " << rate_p << ", R_h rate " << rate_r << ", inverse constant " << *lo << ".." << *hi
           << ", norm identities " << norm_gap << ", (-Lap_h)^b R_h - P_h (-Lap)^b " << ident;
  return o;
}

const std::vector<std::pair<std::string, std::string>> kAllRuns{
    {"special-selftest.cfg", "special-selftest"}, {"stability.cfg", "stability"},
    {"modeling-error.cfg", "modeling-error"},     {"fem-deterministic.cfg", "fem-deterministic"},
    {"fem-error.cfg", "fem-error"},               {"holder.cfg", "holder"}};

Outcome ac10(const Settings& st) {
  Outcome o;
  int compared = 0;
  for (const auto& [file, tag] : kAllRuns) {
    const RunConfig cfg = load_config((st.configs / file).string());
    std::vector<std::string> names{cfg.study + ".csv", cfg.study + "_companions.csv", "summary.json"};
    std::vector<fs::path> dirs;
    const fs::path first = st.work / "runs" / tag;
    if (!fs::exists(first / "summary.json")) {
      int code = 0;
      run_config(st, file, tag, code);
    }
    dirs.push_back(first);
    for (int threads : {1, 8}) {
      const fs::path out = st.work / ("threads" + std::to_string(threads)) / tag;
      fs::remove_all(out);
      if (!st.tfwave.empty()) {
        const std::string cmd = "\"" + st.tfwave + "\" --config \"" + (st.configs / file).string() + "\" --threads " +
                                std::to_string(threads) + " --out \"" + out.string() + "\" > /dev/null";
        const int rc = std::system(cmd.c_str());
        o.require(rc == 0, tag + " CLI exit status");
      } else {
        std::ostringstream log;
        tfw::run(cfg, out.string(), threads, log);
      }
      dirs.push_back(out);
    }
    for (const auto& name : names) {
      if (!fs::exists(dirs[0] / name)) continue;
      const std::string ref = slurp(dirs[0] / name);
      for (std::size_t d = 1; d < dirs.size(); ++d) {
        o.require(fs::exists(dirs[d] / name) && slurp(dirs[d] / name) == ref, tag + "/" + name);
        ++compared;
      }
    }
  }
  o.detail << compared << " file comparisons across 3 runs (threads " << st.threads << " in-process, --threads 1, --threads 8"
           << (st.tfwave.empty() ? ", in-process" : " via CLI") << ")";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  Settings st;
  std::string configs = "configs", work = "acceptance_out";
  std::vector<int> only;
  app.add_option("--tfwave", st.tfwave, "CLI binary used by criterion 10");
  app.add_option("--configs", configs, "Directory with the study configs");
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--threads", st.threads, "Worker threads for the in-process runs");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  st.configs = configs;
  st.work = work;
  fs::create_directories(st.work);

  struct Criterion {
    int id;
    std::string name;
    double limit_s;  // 0: no runtime limit
    std::function<Outcome(const Settings&)> fn;
  };
  const std::vector<Criterion> all{
      {1, "special functions", 5, ac1},
      {2, "noise", 60, ac2},
      {3, "solver exactness", 5, ac3},
      {4, "additive-noise variance", 120, ac4},
      {5, "modelling-error rate", 1200, [](const Settings& s) { return ac_study(s, {{"modeling-error.cfg", "modeling-error"}}); }},
      {6, "FEM and total-error rates", 1800,
       [](const Settings& s) {
         return ac_study(s, {{"fem-deterministic.cfg", "fem-deterministic"}, {"fem-error.cfg", "fem-error"}});
       }},
      {7, "Hoelder probe", 600, [](const Settings& s) { return ac_study(s, {{"holder.cfg", "holder"}}); }},
      {8, "stability probe", 10, [](const Settings& s) { return ac_study(s, {{"stability.cfg", "stability"}}); }},
      {9, "FEM algebra", 60, ac9},
      {10, "determinism", 0, ac10},
  };

  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn(st);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs > c.limit_s) o.require(false, "runtime");
    if (!o.pass) ++failed;
    std::printf("AC%-2d %s  %-26s %7.1f s%s  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name.c_str(), secs,
                c.limit_s > 0 ? (" (limit " + std::to_string(static_cast<int>(c.limit_s)) + " s)").c_str() : "",
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
