#pragma once

// Continuous problem on D = (0, L) with homogeneous Dirichlet data:
//
//   ^c D_t^{alpha,nu} u + (-Laplace)^beta u = f(t,u) + g(t,u) dW/dt + h(t,u) dW^H/dt,
//   u(0) = a,  u_t(0) = b.
//
// Everything is expressed in the Dirichlet sine basis
// phi_k(x) = sqrt(2/L) sin(k pi x / L), lambda_k = (k pi / L)^2, and the
// noise basis e_k is taken equal to phi_k.

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace tfw {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Eigenpair {
  double lambda;
  double norm_factor;  // sqrt(2/L)
  double wavenumber;   // k pi / L

  double phi(double x) const;
};

/// Dirichlet eigenpair on (0, L), k >= 1.
Eigenpair eigenpair(int k, double domain_len);

/// lambda_k^beta for k = 1..n.
Vec frac_eigenvalues(int n_modes, double domain_len, double beta);

/// Componentwise multiplication by lambda_k^beta.
Vec frac_laplacian_apply(const Vec& coeffs, double beta, double domain_len);

/// sqrt(sum_k lambda_k^s c_k^2).
double hs_norm(const Vec& coeffs, double s, double domain_len);

enum class NonlinearityKind { zero, affine, sine_bounded, diagonal_multiplicative, dense };

std::string to_string(NonlinearityKind kind);
NonlinearityKind nonlinearity_kind_from_string(const std::string& name);

/// One of f, g, h.
///
/// The built-in kinds act mode by mode through a scalar map sigma:
///   affine                  sigma(x) = c0 + c1 x
///   sine_bounded            sigma(x) = l sin(x)
///   diagonal_multiplicative sigma(x) = c0 + c1 sin(x)
/// For f the image is (sigma(u_k))_k; for g and h it is the diagonal operator
/// g^{j,k} = delta_{jk} sigma(u_j). The dense kind takes user callbacks.
struct NonlinearitySpec {
  NonlinearityKind kind = NonlinearityKind::zero;
  double c0 = 0.0;
  double c1 = 0.0;
  double amplitude = 0.0;  // l for sine_bounded

  std::function<Vec(double, const Vec&)> dense_drift;     // f(t, u), length K
  std::function<Mat(double, const Vec&)> dense_operator;  // g^{j,k}(t, u), K x K
  double dense_lipschitz = 0.0;                           // declared by the caller

  bool is_zero() const noexcept { return kind == NonlinearityKind::zero; }
  bool is_diagonal() const noexcept { return kind != NonlinearityKind::dense; }

  /// Scalar map of the built-in kinds.
  double sigma(double x) const;

  /// Constant l with ||F(u1)-F(u2)|| <= l ||u1-u2|| and ||F(u)|| <= l (1 + ||u||)
  /// at truncation K (Hilbert-Schmidt norm for operator images).
  double lipschitz(int n_modes) const;
};

/// Drift image f(t, u) as modal coefficients.
Vec apply_drift(const NonlinearitySpec& spec, double t, const Vec& u);

/// Diagonal of the operator image (built-in kinds only).
Vec apply_diagonal(const NonlinearitySpec& spec, double t, const Vec& u);

/// Full operator image g^{j,k}(t, u), K x K.
Mat apply_operator(const NonlinearitySpec& spec, double t, const Vec& u);

enum class CoeffKind { zero, exponential, power };

/// Rule for a noise coefficient sequence varsigma_k(t) (or rho_k(t)) and its
/// spatial approximation varsigma_k^n(t).
///
///   varsigma_k(t)   = scale * d_k * (1 + mod_amp * sin(mod_freq * t))
///   varsigma_k^n(t) = (1 + perturbation) * varsigma_k(t)
///
/// with d_k = exp(-rate k) (exponential) or k^{-rate} (power).
struct CoeffRule {
  CoeffKind kind = CoeffKind::exponential;
  double scale = 1.0;
  double rate = 1.0;
  double mod_amp = 0.0;
  double mod_freq = 0.0;
  double perturbation = 0.0;

  double decay(int k) const;
  double value(int k, double t) const;
  double approx(int k, double t) const { return (1.0 + perturbation) * value(k, t); }

  double mu(int k) const;     // sup_t |varsigma_k|
  double gamma(int k) const;  // sup_t |varsigma_k'|
  double eta(int k) const;    // sup_t |varsigma_k - varsigma_k^n|
};

struct CoeffSequences {
  CoeffRule sigma;  // white-noise coefficients
  CoeffRule rho;    // fractional-noise coefficients
};

struct ModelSpec {
  double alpha = 1.8;
  double beta = 0.9;
  double nu = 1.0;
  double hurst = 0.75;
  double domain_len = 1.0;
  double horizon = 1.0;
  int n_modes = 32;
  Vec init_a;
  Vec init_b;
  NonlinearitySpec f_spec;
  NonlinearitySpec g_spec;
  NonlinearitySpec h_spec;
  CoeffSequences noise_coeffs;
  double gamma_declared = 0.0;  // regularity index of f, g, h; user metadata

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  /// Pads init_a/init_b with zeros (or truncates) to n_modes.
  void normalize_initial_data();

  Vec lambda_beta() const { return frac_eigenvalues(n_modes, domain_len, beta); }

  /// max(gamma, beta/alpha), the index used by the regularity and error bounds.
  double gamma_tilde() const;
  /// max(gamma, 2 beta/alpha), the alternative form that also appears in the text.
  double gamma_tilde_alt() const;
  /// Sobolev index 2 gamma_tilde - 2 beta/alpha of the modelling-error norm.
  double error_norm_index() const;

  bool is_linear_homogeneous() const {
    return f_spec.is_zero() && g_spec.is_zero() && h_spec.is_zero();
  }
};

/// Benchmark model: alpha=1.8, beta=0.9, nu=1, H=0.75, K=32, L=1, T=1,
/// f = sin (l=1), g and h diagonal multiplicative, varsigma_k = rho_k = e^{-k},
/// a = phi_1, b = 0.
ModelSpec benchmark_model();

}  // namespace tfw
