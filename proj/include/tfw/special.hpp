#pragma once

// Gamma and two-parameter Mittag-Leffler functions on the real line.
//
// E_{a,b}(z) = sum_k z^k / Gamma(a k + b). Near the origin (and for moderate
// positive z) the power series is summed directly. For negative z beyond the
// Taylor radius the function is evaluated as the inverse Laplace transform of
// s^(a-b) / (s^a - z) on an optimally placed parabolic contour, plus the
// residues of the poles lying to the right of that contour (Garrappa's
// scheme). The residues carry the exponentially damped oscillatory part that
// the algebraic large-|z| expansion misses when a approaches 2.

namespace tfw::special {

inline constexpr double kDefaultTol = 1e-12;

/// Series is used for -kTaylorRadius <= z. Beyond it, the contour scheme.
inline constexpr double kTaylorRadius = 1.0;

/// Largest positive argument accepted by the series branch.
inline constexpr double kMaxPositiveArg = 40.0;

struct MlfParams {
  double alpha = 1.0;    // in (0, 2]
  double beta_ml = 1.0;  // any real
  double tol = kDefaultTol;
};

/// Gamma(x). Throws PoleError at non-positive integers, OverflowError for x > 171.6.
double gamma(double x);

/// 1/Gamma(x), which is entire: returns exactly 0 at the poles of Gamma.
double rgamma(double x);

/// E_{alpha,beta}(z).
///
/// Throws std::invalid_argument for alpha outside (0, 2] or tol <= 0,
/// ConvergenceError when the requested tolerance cannot be certified and
/// OverflowError for positive arguments whose value exceeds double range.
double ml(const MlfParams& params, double z);

inline double ml(double alpha, double beta_ml, double z) {
  return ml(MlfParams{alpha, beta_ml, kDefaultTol}, z);
}

}  // namespace tfw::special
