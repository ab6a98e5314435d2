#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tfw/experiments.hpp"

using namespace tfw;
using namespace tfw::experiments;

namespace {

ModelSpec linear_model() {
  ModelSpec m = benchmark_model();
  m.f_spec = {};
  m.g_spec = {};
  m.h_spec = {};
  m.n_modes = 8;
  m.normalize_initial_data();
  return m;
}

McOptions small_mc(int n, int threads = 1) {
  McOptions mc;
  mc.n_samples = n;
  mc.min_samples = n;
  mc.batch = std::min(n, 25);
  mc.seed = 77;
  mc.threads = threads;
  return mc;
}

ModelingErrorOptions small_modeling(int n, int threads) {
  ModelingErrorOptions o;
  o.tau_exponents = {3, 4, 5};
  o.ref_exponent = 7;
  o.eta_delta = 0.1;
  o.mc = small_mc(n, threads);
  return o;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

int count(const std::string& s, char c) { return static_cast<int>(std::count(s.begin(), s.end(), c)); }

}  // namespace

TEST_CASE("fit_rate on exact and noisy power laws") {
  const std::vector<double> x{0.5, 0.25, 0.125, 0.0625};
  std::vector<double> y2, y15;
  for (double v : x) {
    y2.push_back(v * v);
    y15.push_back(3 * std::pow(v, 1.5));
  }
  const RateFit a = fit_rate(x, y2);
  CHECK(a.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(a.ci_high - a.ci_low < 1e-12);
  CHECK(a.n_points == 4);
  const RateFit b = fit_rate(x, y15);
  CHECK(b.slope == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(b.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-13));

  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd(0.0, 0.05);
  int covered = 0;
  const int trials = 1000;
  std::vector<double> xs;
  for (int e = 2; e <= 9; ++e) xs.push_back(std::pow(2.0, -e));
  for (int t = 0; t < trials; ++t) {
    std::vector<double> ys;
    for (double v : xs) ys.push_back(v * v * std::exp(nd(rng)));
    const RateFit f = fit_rate(xs, ys);
    if (f.ci_low <= 2.0 && 2.0 <= f.ci_high) ++covered;
  }
  CHECK(covered >= 930);
  CHECK(covered <= 970);

  CHECK_THROWS(fit_rate({1.0, 2.0}, {1.0, 4.0}));
  CHECK_THROWS(fit_rate({1.0, 2.0, 3.0}, {1.0, 0.0, 9.0}));
  CHECK_THROWS(fit_rate({1.0, 2.0, 3.0}, {1.0, 4.0}));
}

TEST_CASE("pairwise_sum") {
  std::vector<double> v(1000);
  for (int i = 0; i < 1000; ++i) v[i] = 1.0 / (i + 1);
  long double ref = 0.0L;
  for (double x : v) ref += x;
  CHECK(std::fabs(pairwise_sum(v.data(), v.size()) - static_cast<double>(ref)) < 1e-14);
  CHECK(pairwise_sum(v.data(), 0) == 0.0);
  CHECK(pairwise_sum(v.data(), 1) == 1.0);
  std::vector<double> big{1e16, 1.0, -1e16, 1.0};
  CHECK(pairwise_sum(big.data(), 4) == pairwise_sum(big.data(), 4));
}

TEST_CASE("ms_error trivial cases") {
  const ModelSpec m = linear_model();
  const ModalTrajectory e = solver::exact_linear(m, 1.0 / 16, 16);
  auto [z, zs] = ms_error({{e, e}, {e, e}}, 0.3, 1.0);
  CHECK(z == 0.0);
  CHECK(zs == 0.0);

  ModalTrajectory shifted = e;
  const double eps = 1e-3;
  shifted.coeffs.col(0).array() += eps;
  for (double s : {0.0, 0.5, 1.2}) {
    auto [v, se] = ms_error({{shifted, e}, {shifted, e}, {shifted, e}}, s, 0.5);
    CHECK(v == doctest::Approx(eps * eps * std::pow(eigenpair(1, 1.0).lambda, s)).epsilon(1e-10));
    CHECK(se == 0.0);
  }

  const int n = 64;
  const NoisePath p = noise::sample_path(m.n_modes, n, 1.0 / n, m.hurst, 1);
  auto [lin, lin_se] = ms_error({{solver::exact_linear(m, 1.0 / n, n), solver::solve_regularized(m, p)}}, 0.0, 1.0);
  CHECK(lin < 1e-18);

  CHECK_THROWS(ms_error({{e, solver::exact_linear(m, 1.0 / 32, 32)}}, 0.0, 1.0));
  CHECK_THROWS(ms_error({{e, e}}, 0.0, 0.3));
  CHECK_THROWS(ms_error({}, 0.0, 1.0));
}

TEST_CASE("run_mc is unbiased on synthetic Gaussian pairs") {
  // ref - cand ~ N(0, diag(s_k^2)) in H^0, so E||ref - cand||^2 = sum s_k^2.
  const Vec sd = (Vec(4) << 0.3, 0.1, 0.05, 0.02).finished();
  const double expect = sd.squaredNorm();
  const SampleFn fn = [&](std::uint64_t sample, std::vector<double>& v, std::vector<double>&) {
    std::mt19937_64 rng(noise::stream_seed(5, sample, 1, noise::Channel::brownian));
    std::normal_distribution<double> nd;
    double acc = 0.0;
    for (int k = 0; k < sd.size(); ++k) acc += std::pow(sd[k] * nd(rng), 2);
    v[0] = acc;
  };
  McOptions mc = small_mc(4000);
  mc.rel_stderr = 0.0;
  const McEstimate est = run_mc(1, mc, fn, {0});
  CHECK(est.n_samples == 4000);
  CHECK(std::fabs(est.mean[0] - expect) < 3.0 * est.stderr_mean[0]);
  // Var ||X||^2 = 2 sum s_k^4.
  const double se_theory = std::sqrt(2.0 * sd.array().pow(4).sum() / 4000);
  CHECK(est.stderr_mean[0] == doctest::Approx(se_theory).epsilon(0.1));
}

TEST_CASE("run_mc does not depend on the worker count and stops between batches") {
  const SampleFn fn = [](std::uint64_t sample, std::vector<double>& v, std::vector<double>& ms) {
    std::mt19937_64 rng(sample * 7919 + 1);
    std::exponential_distribution<double> ex(1.0);
    v[0] = ex(rng);
    v[1] = ex(rng) * 1e-3;
    ms[0] = 0.0;
  };
  McOptions mc = small_mc(3000);
  mc.min_samples = 200;
  mc.batch = 100;
  mc.rel_stderr = 0.05;
  mc.threads = 1;
  const McEstimate one = run_mc(2, mc, fn, {0});
  mc.threads = 4;
  const McEstimate four = run_mc(2, mc, fn, {0});
  CHECK(one.mean == four.mean);
  CHECK(one.stderr_mean == four.stderr_mean);
  CHECK(one.n_samples == four.n_samples);
  CHECK(one.n_samples % 100 == 0);
  CHECK(one.n_samples >= 200);
  CHECK(one.n_samples < 3000);
  CHECK(one.stderr_mean[0] <= 0.05 * one.mean[0]);

  mc.rel_stderr = 0.0;
  CHECK(run_mc(2, mc, fn, {0}).n_samples == 3000);
  CHECK(run_mc(2, mc, fn, {}).n_samples == 3000);
}

TEST_CASE("common random numbers reduce the estimator variance") {
  const ModelSpec m = benchmark_model();
  const int n_fine = 64, n_coarse = 16, paths = 60;
  auto t_fine = solver::make_table(m, 1.0 / n_fine, n_fine);
  std::vector<double> paired, independent;
  for (int s = 0; s < paths; ++s) {
    const NoisePath fine = noise::sample_path(m.n_modes, n_fine, 1.0 / n_fine, m.hurst, 3, s);
    const NoisePath other = noise::sample_path(m.n_modes, n_fine, 1.0 / n_fine, m.hurst, 4, s);
    const Vec ref = solver::solve_regularized(m, fine, t_fine).at(n_fine);
    const Vec same = solver::solve_regularized(m, noise::coarsen(fine, 4), t_fine).at(n_coarse);
    const Vec indep = solver::solve_regularized(m, noise::coarsen(other, 4), t_fine).at(n_coarse);
    paired.push_back((ref - same).squaredNorm());
    independent.push_back((ref - indep).squaredNorm());
  }
  auto var = [](const std::vector<double>& v) {
    double mu = 0.0, s = 0.0;
    for (double x : v) mu += x / v.size();
    for (double x : v) s += (x - mu) * (x - mu);
    return s / (v.size() - 1);
  };
  MESSAGE("paired var " << var(paired) << ", independent var " << var(independent));
  CHECK(var(paired) < var(independent));
}

TEST_CASE("modeling study: ladder shape, zero-noise exactness and thread independence") {
  const ModelSpec bm = benchmark_model();
  const ErrorReport r1 = modeling_error_study(bm, small_modeling(50, 1));
  const ErrorReport r3 = modeling_error_study(bm, small_modeling(50, 3));
  CHECK(to_csv(r1) == to_csv(r3));
  CHECK(companions_csv({r1}) == companions_csv({r3}));
  const auto main = r1.series("main");
  REQUIRE(main.size() == 3);
  for (std::size_t i = 0; i + 1 < main.size(); ++i) CHECK(main[i].param > main[i + 1].param);
  for (const auto& l : r1.ladder) {
    CHECK(l.mse >= 0.0);
    CHECK(l.n_samples == 50);
  }
  CHECK(r1.fit.has_value());
  CHECK(!r1.series("eta").empty());
  CHECK(!r1.series("ref_finer").empty());

  const ModelSpec lin = linear_model();
  ModelingErrorOptions o = small_modeling(5, 1);
  o.eta_delta = 0.0;
  o.ref_shift_tol = 0.0;
  const ErrorReport z = modeling_error_study(lin, o);
  for (const auto& l : z.ladder) CHECK(l.mse < 1e-18);

  ModelSpec perturbed = bm;
  perturbed.noise_coeffs.sigma.perturbation = 0.1;
  CHECK_THROWS(modeling_error_study(perturbed, o));
  o.ref_exponent = 5;
  CHECK_THROWS(modeling_error_study(bm, o));
}

TEST_CASE("fem study: deterministic beta = 1 rate") {
  ModelSpec m = linear_model();
  m.beta = 1.0;
  FemErrorOptions o;
  o.h_exponents = {3, 4, 5, 6};
  o.tau_exponent = 6;
  o.raw_band = std::make_pair(3.5, 4.3);
  o.mc = small_mc(1);
  const ErrorReport r = fem_error_study(m, o);
  REQUIRE(r.fit.has_value());
  MESSAGE("deterministic FEM slope " << r.fit->slope);
  CHECK(r.fit->slope >= 3.5);
  CHECK(r.fit->slope <= 4.3);
  const auto main = r.series("main");
  for (std::size_t i = 0; i + 1 < main.size(); ++i) CHECK(main[i + 1].mse < main[i].mse);
}

TEST_CASE("holder probe: smooth and trivial cases") {
  ModelSpec m = linear_model();
  HolderOptions o;
  o.tau_exponent = 10;
  o.lag_exponents = {4, 5, 6, 7, 8};
  o.mc = small_mc(1);
  const ErrorReport r = holder_probe(m, o);
  REQUIRE(r.fit.has_value());
  MESSAGE("smooth holder slope " << r.fit->slope);
  CHECK(r.fit->slope == doctest::Approx(2.0).epsilon(0.03));

  m.init_a.setZero();
  m.init_b.setZero();
  const ErrorReport z = holder_probe(m, o);
  for (const auto& l : z.ladder) CHECK(l.mse == 0.0);

  o.lag_exponents = {1, 2, 3};
  CHECK_THROWS(holder_probe(linear_model(), o));
}

TEST_CASE("probes without sampling pass") {
  CHECK(stability_probe(StabilityOptions{}).passed());
  const ErrorReport s = special_selftest();
  CHECK(s.passed());
  CHECK(!s.checks.empty());
}

TEST_CASE("CSV layout") {
  ErrorReport r;
  r.study = "modeling-error";
  r.param_name = "tau";
  r.ladder = {{"main", 0.0625, 1.0 / 3, 1e-5, 40, 12.5}, {"main", 0.03125, 0.1, 2e-6, 40, 3.0},
              {"eta", 0.0625, 0.5, 1e-4, 40, 1.0}};
  RateFit f;
  f.slope = 1.9;
  f.ci_low = 1.8;
  f.ci_high = 2.0;
  r.fit = f;
  r.checks.push_back({"rate", 1.9, 1.7, 2.3, true});

  const auto rows = lines(to_csv(r));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "study,series,param_name,param,value,stderr,n_samples,rate,ci_low,ci_high,corrected_rate,status");
  CHECK(rows[1] == "modeling-error,main,tau,0.0625,0.33333333333333331,1.0000000000000001e-05,40,,,,,");
  CHECK(rows[3] == "modeling-error,summary,tau,,,,,1.8999999999999999,1.8,2,,PASS");
  for (const auto& l : rows) CHECK(count(l, ',') == 11);

  CHECK(has_companions({r}));
  const auto comp = lines(companions_csv({r}));
  REQUIRE(comp.size() == 2);
  CHECK(comp[1].rfind("modeling-error,eta,tau,0.0625,0.5,", 0) == 0);

  const auto timing = lines(timing_csv(r));
  CHECK(timing[0] == "study,series,param,wall_ms");
  CHECK(timing[1] == "modeling-error,main,0.0625,12.5");
  CHECK(timing.back().rfind("modeling-error,total,,", 0) == 0);

  r.checks[0].pass = false;
  CHECK(lines(to_csv(r))[3].substr(lines(to_csv(r))[3].size() - 4) == "FAIL");
}
