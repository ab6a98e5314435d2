#pragma once

// Monte-Carlo error studies. Every sample index owns its noise streams, each
// sample's result is written to its own slot and means are reduced pairwise
// in index order, so results do not depend on the worker count. Samples are
// drawn in fixed-size batches; the stopping rule is checked only between
// batches.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tfw/fem.hpp"
#include "tfw/model.hpp"
#include "tfw/solver.hpp"

namespace tfw::experiments {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;   // 95% band for the slope
  double ci_high = 0.0;
  int n_points = 0;
};

/// OLS fit of log y against log x. Needs >= 3 points, all positive.
RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y);

struct LevelRow {
  std::string series;  // "main" or a named companion ladder
  double param = 0.0;  // tau, h or lag
  double mse = 0.0;
  double stderr_mse = 0.0;
  int n_samples = 0;
  double wall_ms = 0.0;
};

struct Check {
  std::string name;
  double value = 0.0;
  double low = 0.0;
  double high = 0.0;
  bool pass = false;
};

struct ErrorReport {
  std::string study;
  std::string param_name;
  std::vector<LevelRow> ladder;
  std::optional<RateFit> fit;
  std::optional<RateFit> fit_corrected;  // log(mse / |ln h|) against log h
  std::vector<Check> checks;
  std::map<std::string, double> metrics;
  double wall_ms = 0.0;

  bool passed() const;
  std::vector<LevelRow> series(const std::string& name) const;
};

struct McOptions {
  int n_samples = 2000;
  int min_samples = 200;
  int batch = 100;
  double rel_stderr = 0.05;
  std::uint64_t seed = 20240917;
  int threads = 0;  // 0: hardware concurrency
};

struct McEstimate {
  std::vector<double> mean;
  std::vector<double> stderr_mean;
  std::vector<double> wall_ms;  // summed per-quantity sample time
  int n_samples = 0;
};

/// Per-sample work: fills one value per quantity and, optionally, the time
/// spent on each quantity.
using SampleFn = std::function<void(std::uint64_t sample, std::vector<double>& values, std::vector<double>& ms)>;

/// Runs samples 0, 1, ... in batches until n_samples, or until every quantity
/// listed in `stop_on` has stderr <= rel_stderr * mean (after min_samples).
McEstimate run_mc(int n_quantities, const McOptions& opts, const SampleFn& fn, const std::vector<int>& stop_on);

/// Sum in fixed pairwise order.
double pairwise_sum(const double* v, std::size_t n);

/// Sample mean and standard error of ||ref(t) - cand(t)||^2_{H^s} over pairs
/// on identical grids.
std::pair<double, double> ms_error(const std::vector<std::pair<ModalTrajectory, ModalTrajectory>>& pairs,
                                   double s, double t_eval);

struct ModelingErrorOptions {
  std::vector<int> tau_exponents{4, 5, 6, 7, 8, 9};  // tau = T 2^-e
  int ref_exponent = 12;
  double band_low = 1.7;
  double band_high = 2.3;
  double eta_delta = 0.1;     // 0 disables the perturbed-coefficient ladder
  double floor_factor = 2.0;  // finest perturbed MSE within this factor of the floor
  double flat_ratio = 0.8;    // and at least this fraction of the previous level
  double ref_shift_tol = 0.05;  // |slope(ref) - slope(ref refined once)|; 0 disables
  McOptions mc;
};

/// E||u_ref(T) - u_tau(T)||^2 along a dyadic tau ladder, all levels driven by
/// coarsenings of one fine path per sample.
ErrorReport modeling_error_study(const ModelSpec& model, const ModelingErrorOptions& opts);

struct FemErrorOptions {
  std::vector<int> h_exponents{2, 3, 4, 5};  // h = L 2^-e
  int tau_exponent = 7;
  int k_ref = 0;               // 0: 4 (M_max + 1)
  double slope_margin = 0.5;   // corrected slope >= 4 gamma_tilde - margin
  std::optional<std::pair<double, double>> raw_band;  // optional two-sided band on the raw slope
  McOptions mc;
};

/// E||u_n(T) - u_n^h(T)||^2 along a mesh ladder against a spectral reference
/// with k_ref >= 4M modes on the same paths.
ErrorReport fem_error_study(const ModelSpec& model, const FemErrorOptions& opts);

struct TotalErrorOptions {
  int h_exponent = 3;
  std::vector<int> tau_exponents{3, 4, 5, 6, 7, 8};
  int ref_exponent = 10;
  int k_ref = 0;
  double floor_factor = 2.0;
  double flat_ratio = 0.8;
  McOptions mc;
};

/// E||u(T) - u_n^h(T)||^2 at fixed h along a tau ladder; the reference is
/// the fine spectral solution. The floor is measured as the FEM error at the
/// reference step.
ErrorReport total_error_study(const ModelSpec& model, const TotalErrorOptions& opts);

struct HolderOptions {
  int tau_exponent = 11;
  std::vector<int> lag_exponents{2, 3, 4, 5, 6, 7, 8, 9};  // delta = T 2^-e
  double margin = 0.2;  // slope >= 2 alpha - 2 - margin
  McOptions mc;
};

/// Slope of log E||u(T/2 + delta) - u(T/2)||^2 against log delta.
ErrorReport holder_probe(const ModelSpec& model, const HolderOptions& opts);

struct StabilityOptions {
  std::vector<double> lam_betas{1.0, 1e2, 1e4};
  std::vector<double> nus{0.0, 1.0, 5.0};
  double alpha = 1.8;
  double t_max = 10.0;
  int n_points = 20000;
  double decay_constant = 15.0;  // measured sup of q (1 + l t^a): 12.67 at alpha = 1.8
};

/// q(t) = |T(t)| e^{nu t} / (1 + nu t) for one mode on [0, t_max]. Checks
/// q <= q(0) = 1 and q(t) (1 + l t^a) <= decay_constant, i.e. the envelope
/// decays like 1 / (1 + l t^a) uniformly in l and nu.
ErrorReport stability_probe(const StabilityOptions& opts);

/// Special-function and quadrature invariants with closed-form oracles.
ErrorReport special_selftest();

/// Header, the main-series rows and one summary row per report. Numbers are
/// printed with 17 significant digits in the C locale.
std::string to_csv(const ErrorReport& report);
std::string to_csv(const std::vector<ErrorReport>& reports);
/// Same columns, rows of every series other than "main" (companion ladders).
std::string companions_csv(const std::vector<ErrorReport>& reports);
bool has_companions(const std::vector<ErrorReport>& reports);
/// Wall-clock sidecar: study, series, param, wall_ms.
std::string timing_csv(const ErrorReport& report);
std::string timing_csv(const std::vector<ErrorReport>& reports);

}  // namespace tfw::experiments
