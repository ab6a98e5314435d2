#include "tfw/special.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "tfw/errors.hpp"

namespace tfw::special {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogEps = -36.043653389117154;  // log(DBL_EPSILON)

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// ---------------------------------------------------------------------------
// Power series with compensated (Neumaier) summation.

double ml_series(double alpha, double beta, double z, double tol) {
  if (z == 0.0) return rgamma(beta);
  const double abs_z = std::fabs(z);
  const double log_abs_z = std::log(abs_z);
  double sum = 0.0;
  double comp = 0.0;
  int small_run = 0;
  constexpr int kMaxTerms = 5000;
  for (int k = 0; k < kMaxTerms; ++k) {
    const double arg = alpha * k + beta;
    double term = 0.0;
    if (!is_nonpositive_integer(arg)) {
      if (arg < 170.0) {
        term = std::pow(z, k) / std::tgamma(arg);
      } else {
        int sign_g = 1;
        const double lg = ::lgamma_r(arg, &sign_g);
        const double mag = std::exp(k * log_abs_z - lg);
        const double sign_z = (z < 0.0 && (k % 2 == 1)) ? -1.0 : 1.0;
        term = sign_z * sign_g * mag;
      }
    }
    if (!std::isfinite(term)) throw OverflowError("Mittag-Leffler series overflow");
    const double t = sum + term;
    comp += (std::fabs(sum) >= std::fabs(term)) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    // Terms decrease monotonically once alpha*k+beta has passed the peak of
    // |z|^k/Gamma; require a few consecutive negligible terms past that point.
    const bool past_peak = alpha * k + beta > std::pow(abs_z, 1.0 / alpha) + 1.0;
    if (past_peak && std::fabs(term) <= 0.25 * tol * std::fabs(sum + comp)) {
      if (++small_run >= 3) return sum + comp;
    } else if (past_peak && sum + comp == 0.0 && term == 0.0) {
      if (++small_run >= 3) return 0.0;
    } else {
      small_run = 0;
    }
  }
  throw ConvergenceError("Mittag-Leffler series did not converge", kInf);
}

// ---------------------------------------------------------------------------
// Inverse Laplace transform on a parabolic contour z(u) = mu (i u + 1)^2.

struct ContourParams {
  double mu = 0.0;
  double h = 0.0;
  double n = kInf;
};

ContourParams optimal_param_bounded(double phi_j, double phi_j1, double pj, double qj,
                                    double log_epsilon) {
  constexpr double kFac = 1.01;
  const double f_max = std::exp(log_epsilon - kLogEps);
  const double sq_phi_j = std::sqrt(phi_j);
  const double threshold = 2.0 * std::sqrt(log_epsilon - kLogEps);
  const double sq_phi_j1 = std::min(std::sqrt(phi_j1), threshold - sq_phi_j);

  double sq_bar_j = sq_phi_j;
  double sq_bar_j1 = sq_phi_j1;
  double f_bar = 1.0;
  bool admissible = true;

  if (pj < 1e-14 && qj >= 1e-14) {
    const double f_min = sq_phi_j > 0.0 ? kFac * std::pow(sq_phi_j / (sq_phi_j1 - sq_phi_j), qj) : kFac;
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fq = std::pow(f_bar, -1.0 / qj);
      sq_bar_j1 = (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq);
    } else {
      admissible = false;
    }
  } else if (pj >= 1e-14 && qj < 1e-14) {
    const double f_min = kFac * std::pow(sq_phi_j1 / (sq_phi_j1 - sq_phi_j), pj);
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / pj);
      sq_bar_j = (2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp);
    } else {
      admissible = false;
    }
  } else if (pj >= 1e-14 && qj >= 1e-14) {
    double f_min = kFac * (sq_phi_j + sq_phi_j1) / std::pow(sq_phi_j1 - sq_phi_j, std::max(pj, qj));
    if (f_min < f_max) {
      f_min = std::max(f_min, 1.5);
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / pj);
      const double fq = std::pow(f_bar, -1.0 / qj);
      const double w = -phi_j1 / log_epsilon;
      const double den = 2.0 + w - (1.0 + w) * fp + fq;
      sq_bar_j = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
      sq_bar_j1 = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
    } else {
      admissible = false;
    }
  }
  if (!admissible) return {};

  const double log_eps_bar = log_epsilon - std::log(f_bar);
  const double w = -sq_bar_j1 * sq_bar_j1 / log_eps_bar;
  ContourParams out;
  out.mu = std::pow(((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w), 2);
  out.h = -2.0 * kPi / log_eps_bar * (sq_bar_j1 - sq_bar_j) / ((1.0 + w) * sq_bar_j + sq_bar_j1);
  out.n = std::ceil(std::sqrt(1.0 - log_eps_bar / out.mu) / out.h);
  return out;
}

ContourParams optimal_param_unbounded(double phi_j, double pj, double log_epsilon) {
  const double sq_phi_j = std::sqrt(phi_j);
  double phibar_j = phi_j > 0.0 ? phi_j * 1.01 : 0.01;
  double sq_phibar_j = std::sqrt(phibar_j);
  constexpr double kFMin = 1.0;
  constexpr double kFMax = 10.0;
  constexpr double kFTar = 5.0;

  double n = 0.0;
  double a = 0.0;
  double sq_mu = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const double log_eps_phi = log_epsilon / phibar_j;
    n = std::ceil(phibar_j / kPi * (1.0 - 1.5 * log_eps_phi + std::sqrt(1.0 - 2.0 * log_eps_phi)));
    a = kPi * n / phibar_j;
    sq_mu = sq_phibar_j * std::fabs(4.0 - a) / std::fabs(7.0 - std::sqrt(1.0 + 12.0 * a));
    const double fbar = std::pow((sq_phibar_j - sq_phi_j) / sq_mu, -pj);
    if (pj < 1e-14 || (kFMin < fbar && fbar < kFMax)) break;
    sq_phibar_j = std::pow(kFTar, -1.0 / pj) * sq_mu + sq_phi_j;
    phibar_j = sq_phibar_j * sq_phibar_j;
  }

  ContourParams out;
  out.mu = sq_mu * sq_mu;
  out.h = (-3.0 * a - 2.0 + 2.0 * std::sqrt(1.0 + 12.0 * a)) / (4.0 - a) / n;
  out.n = n;

  const double threshold = log_epsilon - kLogEps;
  if (out.mu > threshold) {
    const double q = std::fabs(pj) < 1e-14 ? 0.0 : std::pow(kFTar, -1.0 / pj) * std::sqrt(out.mu);
    phibar_j = std::pow(q + sq_phi_j, 2);
    if (phibar_j < threshold) {
      const double w = std::sqrt(kLogEps / (kLogEps - log_epsilon));
      const double u = std::sqrt(-phibar_j / kLogEps);
      out.mu = threshold;
      out.n = std::ceil(w * log_epsilon / 2.0 / kPi / (u * w - 1.0));
      out.h = std::sqrt(kLogEps / (kLogEps - log_epsilon)) / out.n;
    } else {
      out.n = kInf;
      out.h = 0.0;
    }
  }
  return out;
}

double ml_contour(double alpha, double beta, double z, double tol) {
  // Poles of s^(a-b)/(s^a - z) on the principal sheet: s = |z|^(1/a) e^{i(theta + 2 k pi)/a}.
  const double theta = z < 0.0 ? kPi : 0.0;
  const int kmin = static_cast<int>(std::ceil(-alpha / 2.0 - theta / (2.0 * kPi)));
  const int kmax = static_cast<int>(std::floor(alpha / 2.0 - theta / (2.0 * kPi)));
  const double rad = std::pow(std::fabs(z), 1.0 / alpha);

  struct Pole {
    cplx s;
    double phi;
  };
  std::vector<Pole> poles;
  for (int k = kmin; k <= kmax; ++k) {
    const cplx s = std::polar(rad, (theta + 2.0 * kPi * k) / alpha);
    const double phi = 0.5 * (s.real() + std::abs(s));
    if (phi > 1e-15) poles.push_back({s, phi});
  }
  std::stable_sort(poles.begin(), poles.end(), [](const Pole& x, const Pole& y) { return x.phi < y.phi; });

  // Region j lies between phi[j] and phi[j+1]; phi[0] = 0 is the origin branch point.
  std::vector<double> phi{0.0};
  for (const auto& p : poles) phi.push_back(p.phi);
  const std::size_t j1_count = phi.size();
  std::vector<double> p(j1_count, 1.0);
  std::vector<double> q(j1_count, 1.0);
  p[0] = std::max(0.0, -2.0 * (alpha - beta + 1.0));
  q.back() = kInf;
  phi.push_back(kInf);

  std::vector<std::size_t> regions;
  double log_epsilon = std::log(1e-15);
  for (std::size_t j = 0; j < j1_count; ++j) {
    if (phi[j] < log_epsilon - kLogEps && phi[j] < phi[j + 1]) regions.push_back(j);
  }
  if (regions.empty()) throw ConvergenceError("no admissible contour region", kInf);

  std::vector<ContourParams> params(j1_count);
  std::size_t best = 0;
  for (int relax = 0;; ++relax) {
    double best_n = kInf;
    for (std::size_t j : regions) {
      params[j] = (j + 1 < j1_count) ? optimal_param_bounded(phi[j], phi[j + 1], p[j], q[j], log_epsilon)
                                     : optimal_param_unbounded(phi[j], p[j], log_epsilon);
      if (params[j].n < best_n) {
        best_n = params[j].n;
        best = j;
      }
    }
    if (best_n <= 200.0) break;
    log_epsilon += std::log(10.0);
    if (std::exp(log_epsilon) > tol || relax > 10) {
      std::ostringstream os;
      os << "Mittag-Leffler contour cannot certify tol=" << tol << " at z=" << z;
      throw ConvergenceError(os.str(), std::exp(log_epsilon));
    }
  }

  const ContourParams& cp = params[best];
  const int n = static_cast<int>(cp.n);
  const double mu = cp.mu;
  const double h = cp.h;
  const double a_exp = alpha - beta;

  // Conjugate symmetry for real z: the two halves of the trapezoidal sum pair
  // into 2 i Im(.), and the u = 0 node is purely imaginary.
  auto integrand = [&](double u) {
    const cplx s = mu * cplx(1.0 - u * u, 2.0 * u);
    const cplx ds = cplx(-2.0 * mu * u, 2.0 * mu);
    const cplx log_s = std::log(s);
    const cplx num = std::exp(s + a_exp * log_s);
    const cplx den = std::exp(alpha * log_s) - z;
    return num / den * ds;
  };
  double acc = 0.5 * integrand(0.0).imag();
  for (int k = 1; k <= n; ++k) acc += integrand(h * k).imag();
  double value = h / kPi * acc;

  // Residues of poles to the right of the chosen contour.
  cplx residues(0.0, 0.0);
  for (std::size_t i = best; i < poles.size(); ++i) {
    const cplx s = poles[i].s;
    residues += std::exp(s + (1.0 - beta) * std::log(s)) / alpha;
  }
  value += residues.real();
  return value;
}

}  // namespace

double gamma(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("gamma: non-finite argument");
  if (is_nonpositive_integer(x)) {
    std::ostringstream os;
    os << "gamma: pole at x=" << x;
    throw PoleError(os.str());
  }
  if (x > 171.6) throw OverflowError("gamma: overflow for x > 171.6");
  return std::tgamma(x);
}

double rgamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  if (x > 171.0) {
    int sign = 1;
    const double lg = ::lgamma_r(x, &sign);
    return sign * std::exp(-lg);
  }
  return 1.0 / std::tgamma(x);
}

double ml(const MlfParams& params, double z) {
  const double alpha = params.alpha;
  const double beta = params.beta_ml;
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("ml: alpha must lie in (0, 2]");
  if (!(params.tol > 0.0)) throw std::invalid_argument("ml: tol must be positive");
  if (!std::isfinite(z) || !std::isfinite(beta)) throw std::invalid_argument("ml: non-finite argument");
  if (params.tol < 1e-15) throw ConvergenceError("ml: tolerance below double precision", 1e-15);

  if (z >= -kTaylorRadius) {
    if (z > kMaxPositiveArg) throw std::invalid_argument("ml: positive argument above supported range");
    return ml_series(alpha, beta, z, params.tol);
  }
  return ml_contour(alpha, beta, z, params.tol);
}

}  // namespace tfw::special
