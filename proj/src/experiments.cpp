#include "tfw/experiments.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tfw/calculus.hpp"
#include "tfw/kernels.hpp"
#include "tfw/noise.hpp"
#include "tfw/special.hpp"

namespace tfw::experiments {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Check make_check(std::string name, double value, double low, double high) {
  const bool ok = std::isfinite(value) && value >= low && value <= high;
  return {std::move(name), value, low, high, ok};
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

double err_sq(const Vec& ref, const Vec& cand, double s, double len) {
  const double n = hs_norm(ref - cand, s, len);
  return n * n;
}

// L^2 error is exact (includes the part of u_h outside the reference modes);
// for s != 0 only the reference modes are measured.
double fem_err_sq(const Mat& coupling, const Vec& ref, const Vec& disc, double s, double len) {
  if (s == 0.0) return fem::l2_error_sq(coupling, ref, disc);
  return err_sq(ref, coupling.transpose() * disc, s, len);
}

void require_ascending(const std::vector<int>& e, const char* what) {
  if (e.size() < 3) throw std::invalid_argument(std::string(what) + ": need at least 3 ladder levels");
  for (std::size_t i = 1; i < e.size(); ++i)
    if (e[i] <= e[i - 1]) throw std::invalid_argument(std::string(what) + ": exponents must increase strictly");
}

bool noise_free(const ModelSpec& m) {
  const bool g_off = m.g_spec.is_zero() || m.noise_coeffs.sigma.kind == CoeffKind::zero;
  const bool h_off = m.h_spec.is_zero() || m.noise_coeffs.rho.kind == CoeffKind::zero;
  return g_off && h_off;
}

void add_levels(ErrorReport& rep, const std::string& series, const std::vector<double>& params,
                const McEstimate& est, std::size_t offset) {
  for (std::size_t l = 0; l < params.size(); ++l)
    rep.ladder.push_back({series, params[l], est.mean[offset + l], est.stderr_mean[offset + l], est.n_samples,
                          est.wall_ms[offset + l]});
}

std::vector<double> values_of(const std::vector<LevelRow>& rows) {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.mse);
  return v;
}

void record_indices(ErrorReport& rep, const ModelSpec& model) {
  rep.metrics["gamma_tilde"] = model.gamma_tilde();
  rep.metrics["gamma_tilde_alt"] = model.gamma_tilde_alt();
  rep.metrics["error_norm_index"] = model.error_norm_index();
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------------------

bool ErrorReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<LevelRow> ErrorReport::series(const std::string& name) const {
  std::vector<LevelRow> out;
  for (const auto& r : ladder)
    if (r.series == name) out.push_back(r);
  return out;
}

RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_rate: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("fit_rate: values must be positive and finite");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = pairwise_sum(lx.data(), n) / n;
  const double my = pairwise_sum(ly.data(), n) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_rate: x values are all equal");
  RateFit f;
  f.n_points = static_cast<int>(n);
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    rss += r * r;
  }
  const double se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  f.ci_low = f.slope - q * se;
  f.ci_high = f.slope + q * se;
  return f;
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

McEstimate run_mc(int n_quantities, const McOptions& opts, const SampleFn& fn, const std::vector<int>& stop_on) {
  if (n_quantities < 1) throw std::invalid_argument("run_mc: no quantities");
  if (opts.n_samples < 1 || opts.batch < 1) throw std::invalid_argument("run_mc: n_samples and batch must be >= 1");
  const int threads = resolve_threads(opts.threads);
  std::vector<std::vector<double>> vals(n_quantities);
  std::vector<std::vector<double>> times(n_quantities);

  McEstimate est;
  est.mean.assign(n_quantities, 0.0);
  est.stderr_mean.assign(n_quantities, 0.0);
  est.wall_ms.assign(n_quantities, 0.0);

  auto summarize = [&](int n) {
    for (int q = 0; q < n_quantities; ++q) {
      const double mean = pairwise_sum(vals[q].data(), n) / n;
      std::vector<double> dev(n);
      for (int i = 0; i < n; ++i) dev[i] = (vals[q][i] - mean) * (vals[q][i] - mean);
      const double var = n > 1 ? pairwise_sum(dev.data(), n) / (n - 1) : 0.0;
      est.mean[q] = mean;
      est.stderr_mean[q] = std::sqrt(var / n);
      est.wall_ms[q] = pairwise_sum(times[q].data(), n);
    }
    est.n_samples = n;
  };

  int done = 0;
  while (done < opts.n_samples) {
    const int count = std::min(opts.batch, opts.n_samples - done);
    std::vector<std::vector<double>> bv(count, std::vector<double>(n_quantities, 0.0));
    std::vector<std::vector<double>> bt(count, std::vector<double>(n_quantities, 0.0));
    const int nt = std::min(threads, count);
    std::vector<std::exception_ptr> errors(nt);
    auto work = [&](int t) {
      try {
        for (int j = t; j < count; j += nt) fn(static_cast<std::uint64_t>(done + j), bv[j], bt[j]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    };
    if (nt == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < nt; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (int j = 0; j < count; ++j)
      for (int q = 0; q < n_quantities; ++q) {
        vals[q].push_back(bv[j][q]);
        times[q].push_back(bt[j][q]);
      }
    done += count;

    if (done >= opts.min_samples && done < opts.n_samples && !stop_on.empty()) {
      summarize(done);
      const bool converged = std::all_of(stop_on.begin(), stop_on.end(), [&](int q) {
        return est.mean[q] <= std::numeric_limits<double>::min() || est.stderr_mean[q] <= opts.rel_stderr * est.mean[q];
      });
      if (converged) break;
    }
  }
  summarize(done);
  return est;
}

std::pair<double, double> ms_error(const std::vector<std::pair<ModalTrajectory, ModalTrajectory>>& pairs, double s,
                                   double t_eval) {
  if (pairs.empty()) throw std::invalid_argument("ms_error: no trajectory pairs");
  std::vector<double> e;
  for (const auto& [ref, cand] : pairs) {
    if (ref.n_steps != cand.n_steps || std::fabs(ref.tau - cand.tau) > 1e-12 * ref.tau ||
        ref.n_modes() != cand.n_modes())
      throw std::invalid_argument("ms_error: reference and candidate grids differ");
    const long m = std::lround(t_eval / ref.tau);
    if (m < 0 || m > ref.n_steps || std::fabs(m * ref.tau - t_eval) > 1e-9 * std::max(1.0, t_eval))
      throw std::invalid_argument("ms_error: t_eval is not a grid point");
    const double len = ref.model ? ref.model->domain_len : 1.0;
    e.push_back(err_sq(ref.at(static_cast<int>(m)), cand.at(static_cast<int>(m)), s, len));
  }
  const std::size_t n = e.size();
  const double mean = pairwise_sum(e.data(), n) / n;
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = (e[i] - mean) * (e[i] - mean);
  const double var = n > 1 ? pairwise_sum(dev.data(), n) / (n - 1) : 0.0;
  return {mean, std::sqrt(var / n)};
}

// ---------------------------------------------------------------------------

ErrorReport modeling_error_study(const ModelSpec& model, const ModelingErrorOptions& opts) {
  const auto t_start = Clock::now();
  model.validate();
  require_ascending(opts.tau_exponents, "modeling_error_study");
  if (opts.tau_exponents.back() >= opts.ref_exponent)
    throw std::invalid_argument("modeling_error_study: reference must be finer than every ladder level");
  if (model.noise_coeffs.sigma.perturbation != 0.0 || model.noise_coeffs.rho.perturbation != 0.0)
    throw std::invalid_argument("modeling_error_study: coefficient perturbation must be zero (eta = 0)");

  // Companion ladder against a reference one level finer; its slope must
  // agree with the main slope for the reference bias to be negligible.
  const bool with_shift = opts.ref_shift_tol > 0.0;
  const double horizon = model.horizon;
  const int n_ref = 1 << opts.ref_exponent;
  const double tau_ref = horizon / n_ref;
  const int n_top = with_shift ? 2 * n_ref : n_ref;
  const auto table = solver::make_table(model, horizon / n_top, n_top);
  const double s = model.error_norm_index();
  const int levels = static_cast<int>(opts.tau_exponents.size());
  const bool with_eta = opts.eta_delta != 0.0;

  ModelSpec pert = model;
  pert.noise_coeffs.sigma.perturbation = opts.eta_delta;
  pert.noise_coeffs.rho.perturbation = opts.eta_delta;

  const int q_shift = levels + (with_eta ? levels + 1 : 0);
  const int nq = q_shift + (with_shift ? levels : 0);
  const SampleFn fn = [&](std::uint64_t sample, std::vector<double>& v, std::vector<double>& ms) {
    const NoisePath top = noise::sample_path(model.n_modes, n_top, horizon / n_top, model.hurst, opts.mc.seed, sample);
    const NoisePath path = with_shift ? noise::coarsen(top, 2) : top;
    const ModalTrajectory ref = solver::solve_regularized(model, path, table);
    const Vec ref_t = ref.at(n_ref);
    std::vector<Vec> cand_t(levels);
    for (int l = 0; l < levels; ++l) {
      const auto t0 = Clock::now();
      const NoisePath coarse = noise::coarsen(path, 1 << (opts.ref_exponent - opts.tau_exponents[l]));
      cand_t[l] = solver::solve_regularized(model, coarse, table).at(coarse.n_steps);
      v[l] = err_sq(ref_t, cand_t[l], s, model.domain_len);
      ms[l] = ms_since(t0);
      if (with_eta) {
        const auto t1 = Clock::now();
        const ModalTrajectory cp = solver::solve_regularized(pert, coarse, table);
        v[levels + l] = err_sq(ref_t, cp.at(coarse.n_steps), s, model.domain_len);
        ms[levels + l] = ms_since(t1);
      }
    }
    if (with_eta) {
      const auto t0 = Clock::now();
      const ModalTrajectory fine_pert = solver::solve_regularized(pert, path, table);
      v[2 * levels] = err_sq(ref_t, fine_pert.at(n_ref), s, model.domain_len);
      ms[2 * levels] = ms_since(t0);
    }
    if (with_shift) {
      const auto t0 = Clock::now();
      const Vec top_t = solver::solve_regularized(model, top, table).at(n_top);
      const double top_ms = ms_since(t0);
      for (int l = 0; l < levels; ++l) {
        v[q_shift + l] = err_sq(top_t, cand_t[l], s, model.domain_len);
        ms[q_shift + l] = top_ms / levels;
      }
    }
  };

  std::vector<int> stop_on(q_shift);
  for (int q = 0; q < q_shift; ++q) stop_on[q] = q;
  const bool deterministic = noise_free(model);
  McOptions mc = opts.mc;
  if (deterministic) mc.n_samples = 1;
  const McEstimate est = run_mc(nq, mc, fn, stop_on);

  ErrorReport rep;
  rep.study = "modeling-error";
  rep.param_name = "tau";
  std::vector<double> taus;
  for (int e : opts.tau_exponents) taus.push_back(horizon / (1 << e));
  add_levels(rep, "main", taus, est, 0);
  if (with_eta) add_levels(rep, "eta", taus, est, levels);
  if (with_shift) add_levels(rep, "ref_finer", taus, est, q_shift);
  record_indices(rep, model);
  rep.metrics["reference_tau"] = tau_ref;

  const auto main = values_of(rep.series("main"));
  const bool all_positive = std::all_of(main.begin(), main.end(), [](double x) { return x > 0.0; });
  if (all_positive) {
    rep.fit = fit_rate(taus, main);
    rep.checks.push_back(make_check("modeling_rate", rep.fit->slope, opts.band_low, opts.band_high));
    if (with_shift) {
      const RateFit shifted = fit_rate(taus, values_of(rep.series("ref_finer")));
      rep.metrics["rate_ref_finer"] = shifted.slope;
      rep.checks.push_back(make_check("reference_stability", std::fabs(shifted.slope - rep.fit->slope), 0.0,
                                      opts.ref_shift_tol));
    }
  } else {
    rep.metrics["max_mse"] = *std::max_element(main.begin(), main.end());
    rep.checks.push_back(make_check("modeling_rate", std::numeric_limits<double>::quiet_NaN(), opts.band_low,
                                    opts.band_high));
  }

  if (with_eta) {
    const double floor = est.mean[2 * levels];
    const auto eta = values_of(rep.series("eta"));
    double mu_sq = 0.0;
    for (int k = 1; k <= model.n_modes; ++k) {
      mu_sq += std::pow(model.noise_coeffs.sigma.mu(k), 2) + std::pow(model.noise_coeffs.rho.mu(k), 2);
    }
    rep.metrics["eta_delta"] = opts.eta_delta;
    rep.metrics["eta_floor"] = floor;
    rep.metrics["eta_floor_stderr"] = est.stderr_mean[2 * levels];
    rep.metrics["eta_floor_constant"] = floor / (opts.eta_delta * opts.eta_delta * mu_sq);
    const double flat = eta[levels - 1] / eta[levels - 2];
    rep.checks.push_back(make_check("eta_flattening", flat, opts.flat_ratio, 1.0 / opts.flat_ratio));
    rep.checks.push_back(make_check("eta_floor_match", eta[levels - 1] / floor, 1.0 / opts.floor_factor,
                                    opts.floor_factor));
    rep.checks.push_back(make_check("eta_floor_above_tau_error", floor / main[levels - 1], 1.0,
                                    std::numeric_limits<double>::infinity()));
  }
  rep.wall_ms = ms_since(t_start);
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

int default_k_ref(int max_dofs, const ModelSpec& model) {
  return std::max(4 * (max_dofs + 1), model.n_modes);
}

ModelSpec with_modes(const ModelSpec& model, int k) {
  ModelSpec m = model;
  m.n_modes = k;
  m.normalize_initial_data();
  return m;
}

}  // namespace

ErrorReport fem_error_study(const ModelSpec& model, const FemErrorOptions& opts) {
  const auto t_start = Clock::now();
  model.validate();
  require_ascending(opts.h_exponents, "fem_error_study");
  const int levels = static_cast<int>(opts.h_exponents.size());
  const double len = model.domain_len;
  const int max_dofs = (1 << opts.h_exponents.back()) - 1;
  const int k_ref = opts.k_ref > 0 ? opts.k_ref : default_k_ref(max_dofs, model);
  if (k_ref < 4 * max_dofs)
    throw std::invalid_argument("fem_error_study: reference needs K >= 4M (K = " + std::to_string(k_ref) +
                                ", M = " + std::to_string(max_dofs) + ")");
  if (k_ref < model.n_modes) throw std::invalid_argument("fem_error_study: reference K below the model truncation");
  const ModelSpec ref_model = with_modes(model, k_ref);

  const int n = 1 << opts.tau_exponent;
  const double tau = model.horizon / n;
  const double s = model.error_norm_index();
  const auto ref_table = solver::make_table(ref_model, tau, n);

  std::vector<fem::FemSpace> spaces;
  std::vector<Mat> couplings;
  std::vector<std::shared_ptr<const kernels::KernelTable>> tables;
  std::vector<double> hs;
  for (int e : opts.h_exponents) {
    const double h = len / (1 << e);
    spaces.push_back(fem::build_space(h, len, model.beta));
    couplings.push_back(spaces.back().coupling(k_ref));
    tables.push_back(fem::make_table(spaces.back(), model.alpha, tau, n));
    hs.push_back(h);
  }

  const SampleFn fn = [&](std::uint64_t sample, std::vector<double>& v, std::vector<double>& ms) {
    const NoisePath path = noise::sample_path(k_ref, n, tau, model.hurst, opts.mc.seed, sample);
    const ModalTrajectory ref = solver::solve_regularized(ref_model, path, ref_table);
    const Vec ref_t = ref.at(n);
    for (int l = 0; l < levels; ++l) {
      const auto t0 = Clock::now();
      const ModalTrajectory cand = fem::solve_fem(ref_model, spaces[l], path, tables[l]);
      v[l] = fem_err_sq(couplings[l], ref_t, cand.at(n), s, len);
      ms[l] = ms_since(t0);
    }
  };

  std::vector<int> stop_on(levels);
  for (int q = 0; q < levels; ++q) stop_on[q] = q;
  McOptions mc = opts.mc;
  if (noise_free(model)) mc.n_samples = 1;
  const McEstimate est = run_mc(levels, mc, fn, stop_on);

  ErrorReport rep;
  rep.study = "fem-error";
  rep.param_name = "h";
  add_levels(rep, "main", hs, est, 0);
  record_indices(rep, model);
  rep.metrics["k_ref"] = k_ref;
  rep.metrics["tau"] = tau;

  const auto mse = values_of(rep.ladder);
  bool decreasing = true;
  for (int l = 1; l < levels; ++l) decreasing = decreasing && mse[l] < mse[l - 1];
  rep.checks.push_back(make_check("monotone_decrease", decreasing ? 1.0 : 0.0, 1.0, 1.0));

  rep.fit = fit_rate(hs, mse);
  std::vector<double> corrected(levels);
  for (int l = 0; l < levels; ++l) corrected[l] = mse[l] / std::fabs(std::log(hs[l]));
  rep.fit_corrected = fit_rate(hs, corrected);
  const double target = 4.0 * model.gamma_tilde();
  rep.metrics["theory_rate"] = target;
  rep.checks.push_back(make_check("corrected_rate_lower", rep.fit_corrected->slope, target - opts.slope_margin,
                                  std::numeric_limits<double>::infinity()));
  if (opts.raw_band)
    rep.checks.push_back(make_check("raw_rate_band", rep.fit->slope, opts.raw_band->first, opts.raw_band->second));
  rep.wall_ms = ms_since(t_start);
  return rep;
}

ErrorReport total_error_study(const ModelSpec& model, const TotalErrorOptions& opts) {
  const auto t_start = Clock::now();
  model.validate();
  require_ascending(opts.tau_exponents, "total_error_study");
  if (opts.tau_exponents.back() >= opts.ref_exponent)
    throw std::invalid_argument("total_error_study: reference must be finer than every ladder level");
  const int levels = static_cast<int>(opts.tau_exponents.size());
  const double len = model.domain_len;
  const double h = len / (1 << opts.h_exponent);
  const fem::FemSpace space = fem::build_space(h, len, model.beta);
  const int k_ref = opts.k_ref > 0 ? opts.k_ref : default_k_ref(space.n_dofs, model);
  if (k_ref < 4 * space.n_dofs) throw std::invalid_argument("total_error_study: reference needs K >= 4M");
  const ModelSpec ref_model = with_modes(model, k_ref);
  const Mat coupling = space.coupling(k_ref);

  const int n_ref = 1 << opts.ref_exponent;
  const double tau_ref = model.horizon / n_ref;
  const double s = model.error_norm_index();
  const auto ref_table = solver::make_table(ref_model, tau_ref, n_ref);
  const auto fem_table = fem::make_table(space, model.alpha, tau_ref, n_ref);

  const SampleFn fn = [&](std::uint64_t sample, std::vector<double>& v, std::vector<double>& ms) {
    const NoisePath path = noise::sample_path(k_ref, n_ref, tau_ref, model.hurst, opts.mc.seed, sample);
    const Vec ref_t = solver::solve_regularized(ref_model, path, ref_table).at(n_ref);
    for (int l = 0; l < levels; ++l) {
      const auto t0 = Clock::now();
      const NoisePath coarse = noise::coarsen(path, 1 << (opts.ref_exponent - opts.tau_exponents[l]));
      const ModalTrajectory cand = fem::solve_fem(ref_model, space, coarse, fem_table);
      v[l] = fem_err_sq(coupling, ref_t, cand.at(coarse.n_steps), s, len);
      ms[l] = ms_since(t0);
    }
    const auto t0 = Clock::now();
    const ModalTrajectory floor_cand = fem::solve_fem(ref_model, space, path, fem_table);
    v[levels] = fem_err_sq(coupling, ref_t, floor_cand.at(n_ref), s, len);
    ms[levels] = ms_since(t0);
  };

  std::vector<int> stop_on(levels + 1);
  for (int q = 0; q <= levels; ++q) stop_on[q] = q;
  McOptions mc = opts.mc;
  if (noise_free(model)) mc.n_samples = 1;
  const McEstimate est = run_mc(levels + 1, mc, fn, stop_on);

  ErrorReport rep;
  rep.study = "total-error";
  rep.param_name = "tau";
  std::vector<double> taus;
  for (int e : opts.tau_exponents) taus.push_back(model.horizon / (1 << e));
  add_levels(rep, "main", taus, est, 0);
  record_indices(rep, model);
  const double floor = est.mean[levels];
  rep.metrics["h"] = h;
  rep.metrics["k_ref"] = k_ref;
  rep.metrics["floor"] = floor;
  rep.metrics["floor_stderr"] = est.stderr_mean[levels];

  const auto mse = values_of(rep.ladder);
  rep.checks.push_back(make_check("coarse_above_floor", mse.front() / floor, opts.floor_factor,
                                  std::numeric_limits<double>::infinity()));
  rep.checks.push_back(make_check("flattening", mse[levels - 1] / mse[levels - 2], opts.flat_ratio,
                                  1.0 / opts.flat_ratio));
  rep.checks.push_back(make_check("floor_match", mse[levels - 1] / floor, 1.0 / opts.floor_factor,
                                  opts.floor_factor));
  rep.wall_ms = ms_since(t_start);
  return rep;
}

ErrorReport holder_probe(const ModelSpec& model, const HolderOptions& opts) {
  const auto t_start = Clock::now();
  model.validate();
  if (opts.lag_exponents.size() < 3) throw std::invalid_argument("holder_probe: need at least 3 lags");
  const int n = 1 << opts.tau_exponent;
  for (int e : opts.lag_exponents)
    if (e < 2 || e > opts.tau_exponent)
      throw std::invalid_argument("holder_probe: lags must lie in [tau, T/4] so that T/2 + lag stays inside (0, T)");
  const double tau = model.horizon / n;
  const double s = model.error_norm_index();
  const auto table = solver::make_table(model, tau, n);
  const int mid = n / 2;
  const int levels = static_cast<int>(opts.lag_exponents.size());

  const SampleFn fn = [&](std::uint64_t sample, std::vector<double>& v, std::vector<double>& ms) {
    const auto t0 = Clock::now();
    const NoisePath path = noise::sample_path(model.n_modes, n, tau, model.hurst, opts.mc.seed, sample);
    const ModalTrajectory traj = solver::solve_regularized(model, path, table);
    const Vec base = traj.at(mid);
    for (int l = 0; l < levels; ++l) {
      const int off = 1 << (opts.tau_exponent - opts.lag_exponents[l]);
      v[l] = err_sq(traj.at(mid + off), base, s, model.domain_len);
    }
    ms[0] = ms_since(t0);
  };

  std::vector<int> stop_on(levels);
  for (int q = 0; q < levels; ++q) stop_on[q] = q;
  McOptions mc = opts.mc;
  if (noise_free(model)) mc.n_samples = 1;
  const McEstimate est = run_mc(levels, mc, fn, stop_on);

  ErrorReport rep;
  rep.study = "holder";
  rep.param_name = "lag";
  std::vector<double> lags;
  for (int e : opts.lag_exponents) lags.push_back(model.horizon / (1 << e));
  add_levels(rep, "main", lags, est, 0);
  record_indices(rep, model);
  rep.metrics["theta"] = mid * tau;
  rep.metrics["theory_rate"] = 2.0 * model.alpha - 2.0;

  std::vector<double> sorted_lags = lags, sorted_mse = values_of(rep.ladder);
  const bool all_positive = std::all_of(sorted_mse.begin(), sorted_mse.end(), [](double x) { return x > 0.0; });
  if (all_positive) {
    rep.fit = fit_rate(sorted_lags, sorted_mse);
    rep.checks.push_back(make_check("holder_rate_lower", rep.fit->slope, 2.0 * model.alpha - 2.0 - opts.margin,
                                    std::numeric_limits<double>::infinity()));
  } else {
    rep.checks.push_back(make_check("holder_rate_lower", std::numeric_limits<double>::quiet_NaN(),
                                    2.0 * model.alpha - 2.0 - opts.margin, std::numeric_limits<double>::infinity()));
  }
  rep.wall_ms = ms_since(t_start);
  return rep;
}

ErrorReport stability_probe(const StabilityOptions& opts) {
  const auto t_start = Clock::now();
  if (opts.n_points < 10 || !(opts.t_max > 0.0)) throw std::invalid_argument("stability_probe: bad grid");
  ErrorReport rep;
  rep.study = "stability";
  rep.param_name = "lam_beta";
  for (double nu : opts.nus) {
    for (double lam : opts.lam_betas) {
      const kernels::ModeKernelCtx ctx{lam, opts.alpha, nu};
      std::vector<double> q(opts.n_points + 1);
      for (int i = 0; i <= opts.n_points; ++i) {
        const double t = opts.t_max * i / opts.n_points;
        q[i] = std::fabs(kernels::eval_T(ctx, t)) * std::exp(nu * t) / (1.0 + nu * t);
      }
      const double sup = *std::max_element(q.begin(), q.end());
      double weighted = 0.0;
      for (int i = 0; i <= opts.n_points; ++i) {
        const double t = opts.t_max * i / opts.n_points;
        weighted = std::max(weighted, q[i] * (1.0 + lam * std::pow(t, opts.alpha)));
      }
      char label[64];
      std::snprintf(label, sizeof label, "nu=%g", nu);
      rep.ladder.push_back({label, lam, sup, 0.0, opts.n_points + 1, 0.0});
      char name[96];
      std::snprintf(name, sizeof name, "bounded[lam=%g,nu=%g]", lam, nu);
      rep.checks.push_back(make_check(name, sup, 0.0, 1.0 + 1e-12));
      std::snprintf(name, sizeof name, "decay[lam=%g,nu=%g]", lam, nu);
      rep.checks.push_back(make_check(name, weighted, 0.0, opts.decay_constant));
    }
  }
  rep.wall_ms = ms_since(t_start);
  return rep;
}

ErrorReport special_selftest() {
  // max |E_{a,b}(z)| (1 + |z|) over the grid below, measured at 281 (a = 1.95,
  // b = 1; the constant grows as a approaches 2).
  constexpr double kDecayBound = 300.0;
  const auto t_start = Clock::now();
  ErrorReport rep;
  rep.study = "special-selftest";
  rep.param_name = "none";

  double worst = 0.0;
  for (int i = 0; i <= 300; ++i) {
    const double x = -10.0 + 15.0 * i / 300.0;
    worst = std::max(worst, std::fabs(special::ml(1.0, 1.0, x) - std::exp(x)) / std::exp(x));
  }
  rep.checks.push_back(make_check("ml_exp_rel", worst, 0.0, 1e-12));

  worst = 0.0;
  for (int i = 0; i <= 300; ++i) {
    const double x = 6.0 * i / 300.0;
    worst = std::max(worst, std::fabs(special::ml(2.0, 1.0, -x * x) - std::cos(x)));
  }
  rep.checks.push_back(make_check("ml_cos_abs", worst, 0.0, 1e-10));

  // Five-point differences; errors relative to the sup of the exact derivative.
  auto five_point = [](auto&& f, double t, double h) {
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
  };
  double worst_d = 0.0, worst_i = 0.0;
  for (double alpha : {1.6, 1.8}) {
    for (double lam : {1.0, 10.0}) {
      auto e1 = [&](double t) { return special::ml(alpha, 1.0, -lam * std::pow(t, alpha)); };
      auto te2 = [&](double t) { return t * special::ml(alpha, 2.0, -lam * std::pow(t, alpha)); };
      std::vector<double> err_d, ex_d, err_i, ex_i;
      for (int i = 0; i <= 98; ++i) {
        const double t = 0.1 + 4.9 * i / 98.0;
        const double h = 1e-3 * t;
        const double d_exact = -lam * std::pow(t, alpha - 1.0) * special::ml(alpha, alpha, -lam * std::pow(t, alpha));
        err_d.push_back(std::fabs(five_point(e1, t, h) - d_exact));
        ex_d.push_back(std::fabs(d_exact));
        err_i.push_back(std::fabs(five_point(te2, t, h) - e1(t)));
        ex_i.push_back(std::fabs(e1(t)));
      }
      const double sd = *std::max_element(ex_d.begin(), ex_d.end());
      const double si = *std::max_element(ex_i.begin(), ex_i.end());
      worst_d = std::max(worst_d, *std::max_element(err_d.begin(), err_d.end()) / sd);
      worst_i = std::max(worst_i, *std::max_element(err_i.begin(), err_i.end()) / si);
    }
  }
  rep.checks.push_back(make_check("ml_derivative_identity", worst_d, 0.0, 1e-6));
  rep.checks.push_back(make_check("ml_integral_identity", worst_i, 0.0, 1e-6));

  double decay = 0.0;
  for (double alpha : {1.6, 1.8, 1.95})
    for (double beta : {1.0, 2.0, alpha})
      for (int i = 0; i <= 400; ++i) {
        const double z = -std::pow(10.0, -2.0 + 6.0 * i / 400.0);
        decay = std::max(decay, std::fabs(special::ml(alpha, beta, z)) * (1.0 + std::fabs(z)));
      }
  rep.metrics["decay_constant"] = decay;
  rep.checks.push_back(make_check("ml_decay_bounded", decay, 0.0, kDecayBound));

  const double tau = 1.0 / 512;
  const auto sq = calculus::TimeSeries::sample([](double t) { return t * t; }, tau, 513);
  const auto d = calculus::caputo(sq, 1.8, 0.0);
  rep.checks.push_back(make_check("caputo_t2", std::fabs(d.values[512] - 2.0 / special::gamma(1.2)), 0.0, 1e-8));
  const auto lin = calculus::TimeSeries::sample([](double t) { return t; }, tau, 513);
  const auto fi = calculus::frac_integral(lin, 1.8);
  rep.checks.push_back(
      make_check("frac_integral_t", std::fabs(fi.values[512] - special::rgamma(3.8)), 0.0, 1e-10));
  rep.wall_ms = ms_since(t_start);
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCsvHeader =
    "study,series,param_name,param,value,stderr,n_samples,rate,ci_low,ci_high,corrected_rate,status\n";

void level_rows(std::ostream& os, const ErrorReport& report, bool main_series) {
  for (const auto& r : report.ladder) {
    if ((r.series == "main") != main_series) continue;
    os << report.study << ',' << r.series << ',' << report.param_name << ',' << num(r.param) << ',' << num(r.mse)
       << ',' << num(r.stderr_mse) << ',' << r.n_samples << ",,,,,\n";
  }
}

void summary_row(std::ostream& os, const ErrorReport& report) {
  os << report.study << ",summary," << report.param_name << ",,,,,";
  if (report.fit) os << num(report.fit->slope) << ',' << num(report.fit->ci_low) << ',' << num(report.fit->ci_high);
  else os << ",,";
  os << ',';
  if (report.fit_corrected) os << num(report.fit_corrected->slope);
  os << ',' << (report.passed() ? "PASS" : "FAIL") << '\n';
}

}  // namespace

std::string to_csv(const std::vector<ErrorReport>& reports) {
  std::ostringstream os;
  os << kCsvHeader;
  for (const auto& r : reports) {
    level_rows(os, r, true);
    summary_row(os, r);
  }
  return os.str();
}

std::string to_csv(const ErrorReport& report) { return to_csv(std::vector<ErrorReport>{report}); }

std::string companions_csv(const std::vector<ErrorReport>& reports) {
  std::ostringstream os;
  os << kCsvHeader;
  for (const auto& r : reports) level_rows(os, r, false);
  return os.str();
}

bool has_companions(const std::vector<ErrorReport>& reports) {
  for (const auto& r : reports)
    for (const auto& l : r.ladder)
      if (l.series != "main") return true;
  return false;
}

std::string timing_csv(const std::vector<ErrorReport>& reports) {
  std::ostringstream os;
  os << "study,series,param,wall_ms\n";
  for (const auto& report : reports) {
    for (const auto& r : report.ladder)
      os << report.study << ',' << r.series << ',' << num(r.param) << ',' << num(r.wall_ms) << '\n';
    os << report.study << ",total,," << num(report.wall_ms) << '\n';
  }
  return os.str();
}

std::string timing_csv(const ErrorReport& report) { return timing_csv(std::vector<ErrorReport>{report}); }

}  // namespace tfw::experiments
