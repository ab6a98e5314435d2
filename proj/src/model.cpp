#include "tfw/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tfw {

namespace {
constexpr double kPi = std::numbers::pi;

[[noreturn]] void violated(const std::string& what) {
  throw std::invalid_argument("model invariant violated: " + what);
}
}  // namespace

double Eigenpair::phi(double x) const { return norm_factor * std::sin(wavenumber * x); }

Eigenpair eigenpair(int k, double domain_len) {
  if (k < 1) throw std::invalid_argument("eigenpair: k must be >= 1");
  if (!(domain_len > 0.0)) throw std::invalid_argument("eigenpair: L must be positive");
  const double w = k * kPi / domain_len;
  return {w * w, std::sqrt(2.0 / domain_len), w};
}

Vec frac_eigenvalues(int n_modes, double domain_len, double beta) {
  Vec out(n_modes);
  for (int k = 1; k <= n_modes; ++k) out[k - 1] = std::pow(eigenpair(k, domain_len).lambda, beta);
  return out;
}

Vec frac_laplacian_apply(const Vec& coeffs, double beta, double domain_len) {
  return coeffs.cwiseProduct(frac_eigenvalues(static_cast<int>(coeffs.size()), domain_len, beta));
}

double hs_norm(const Vec& coeffs, double s, double domain_len) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    const double lam = eigenpair(static_cast<int>(k) + 1, domain_len).lambda;
    acc += std::pow(lam, s) * coeffs[k] * coeffs[k];
  }
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------

std::string to_string(NonlinearityKind kind) {
  switch (kind) {
    case NonlinearityKind::zero: return "zero";
    case NonlinearityKind::affine: return "affine";
    case NonlinearityKind::sine_bounded: return "sine-bounded";
    case NonlinearityKind::diagonal_multiplicative: return "diagonal-multiplicative";
    case NonlinearityKind::dense: return "dense";
  }
  return "unknown";
}

NonlinearityKind nonlinearity_kind_from_string(const std::string& name) {
  if (name == "zero") return NonlinearityKind::zero;
  if (name == "affine") return NonlinearityKind::affine;
  if (name == "sine-bounded") return NonlinearityKind::sine_bounded;
  if (name == "diagonal-multiplicative") return NonlinearityKind::diagonal_multiplicative;
  if (name == "dense") return NonlinearityKind::dense;
  throw std::invalid_argument("unknown nonlinearity kind '" + name + "'");
}

double NonlinearitySpec::sigma(double x) const {
  switch (kind) {
    case NonlinearityKind::zero: return 0.0;
    case NonlinearityKind::affine: return c0 + c1 * x;
    case NonlinearityKind::sine_bounded: return amplitude * std::sin(x);
    case NonlinearityKind::diagonal_multiplicative: return c0 + c1 * std::sin(x);
    case NonlinearityKind::dense: break;
  }
  throw std::invalid_argument("sigma: kind '" + to_string(kind) + "' has no scalar map");
}

double NonlinearitySpec::lipschitz(int n_modes) const {
  const double root_k = std::sqrt(static_cast<double>(n_modes));
  switch (kind) {
    case NonlinearityKind::zero: return 0.0;
    case NonlinearityKind::affine:
    case NonlinearityKind::diagonal_multiplicative: return std::max(std::fabs(c1), std::fabs(c0) * root_k);
    case NonlinearityKind::sine_bounded: return std::fabs(amplitude);
    case NonlinearityKind::dense: return dense_lipschitz;
  }
  throw std::invalid_argument("lipschitz: unknown kind");
}

Vec apply_drift(const NonlinearitySpec& spec, double t, const Vec& u) {
  if (spec.kind == NonlinearityKind::dense) {
    if (!spec.dense_drift) throw std::invalid_argument("dense drift callback is not set");
    return spec.dense_drift(t, u);
  }
  if (spec.kind == NonlinearityKind::zero) return Vec::Zero(u.size());
  return u.unaryExpr([&](double x) { return spec.sigma(x); });
}

Vec apply_diagonal(const NonlinearitySpec& spec, double t, const Vec& u) {
  if (!spec.is_diagonal()) throw std::invalid_argument("apply_diagonal: dense operator has no diagonal form");
  return apply_drift(spec, t, u);
}

Mat apply_operator(const NonlinearitySpec& spec, double t, const Vec& u) {
  if (spec.kind == NonlinearityKind::dense) {
    if (!spec.dense_operator) throw std::invalid_argument("dense operator callback is not set");
    return spec.dense_operator(t, u);
  }
  return apply_diagonal(spec, t, u).asDiagonal();
}

// ---------------------------------------------------------------------------

double CoeffRule::decay(int k) const {
  switch (kind) {
    case CoeffKind::zero: return 0.0;
    case CoeffKind::exponential: return std::exp(-rate * k);
    case CoeffKind::power: return std::pow(static_cast<double>(k), -rate);
  }
  return 0.0;
}

double CoeffRule::value(int k, double t) const {
  return scale * decay(k) * (1.0 + mod_amp * std::sin(mod_freq * t));
}

double CoeffRule::mu(int k) const { return std::fabs(scale) * decay(k) * (1.0 + std::fabs(mod_amp)); }

double CoeffRule::gamma(int k) const {
  return std::fabs(scale) * decay(k) * std::fabs(mod_amp) * std::fabs(mod_freq);
}

double CoeffRule::eta(int k) const { return std::fabs(perturbation) * mu(k); }

// ---------------------------------------------------------------------------

void ModelSpec::validate() const {
  if (!(alpha > 1.5 && alpha < 2.0)) violated("3/2 < alpha < 2");
  if (!(beta > 0.5 && beta <= 1.0)) violated("1/2 < beta <= 1");
  if (!(nu >= 0.0)) violated("nu >= 0");
  if (!(hurst > 0.5 && hurst < 1.0)) violated("1/2 < hurst < 1");
  if (!(domain_len > 0.0)) violated("domain_len > 0");
  if (!(horizon > 0.0)) violated("horizon > 0");
  if (n_modes < 1) violated("n_modes >= 1");
  if (init_a.size() != n_modes) violated("init_a has length n_modes");
  if (init_b.size() != n_modes) violated("init_b has length n_modes");
  for (const auto* spec : {&f_spec, &g_spec, &h_spec}) {
    if (spec->lipschitz(n_modes) < 0.0) violated("lipschitz_l >= 0");
  }
  if (noise_coeffs.sigma.kind == CoeffKind::power && noise_coeffs.sigma.rate <= 0.5)
    violated("sigma_k square-summable (power rate > 1/2)");
  if (noise_coeffs.rho.kind == CoeffKind::power && noise_coeffs.rho.rate <= 0.5)
    violated("rho_k square-summable (power rate > 1/2)");
  if (noise_coeffs.sigma.kind == CoeffKind::exponential && noise_coeffs.sigma.rate <= 0.0)
    violated("sigma_k square-summable (exponential rate > 0)");
  if (noise_coeffs.rho.kind == CoeffKind::exponential && noise_coeffs.rho.rate <= 0.0)
    violated("rho_k square-summable (exponential rate > 0)");
  if (gamma_declared < 0.0) violated("gamma >= 0");
}

void ModelSpec::normalize_initial_data() {
  auto fit = [&](Vec& v) {
    Vec out = Vec::Zero(n_modes);
    const Eigen::Index n = std::min<Eigen::Index>(v.size(), n_modes);
    out.head(n) = v.head(n);
    v = std::move(out);
  };
  fit(init_a);
  fit(init_b);
}

double ModelSpec::gamma_tilde() const { return std::max(gamma_declared, beta / alpha); }
double ModelSpec::gamma_tilde_alt() const { return std::max(gamma_declared, 2.0 * beta / alpha); }
double ModelSpec::error_norm_index() const { return 2.0 * gamma_tilde() - 2.0 * beta / alpha; }

ModelSpec benchmark_model() {
  ModelSpec m;
  m.alpha = 1.8;
  m.beta = 0.9;
  m.nu = 1.0;
  m.hurst = 0.75;
  m.domain_len = 1.0;
  m.horizon = 1.0;
  m.n_modes = 32;
  m.init_a = Vec::Zero(m.n_modes);
  m.init_a[0] = 1.0;
  m.init_b = Vec::Zero(m.n_modes);
  m.f_spec.kind = NonlinearityKind::sine_bounded;
  m.f_spec.amplitude = 1.0;
  m.g_spec.kind = NonlinearityKind::diagonal_multiplicative;
  m.g_spec.c0 = 1.0;
  m.g_spec.c1 = 0.5;
  m.h_spec = m.g_spec;
  m.noise_coeffs.sigma = CoeffRule{CoeffKind::exponential, 1.0, 1.0};
  m.noise_coeffs.rho = CoeffRule{CoeffKind::exponential, 1.0, 1.0};
  m.gamma_declared = 0.0;
  return m;
}

}  // namespace tfw
