#pragma once

// Product-integration quadratures for fractional integrals and Caputo
// derivatives on uniform grids t_m = m * tau, m = 0..n-1.

#include <optional>
#include <vector>

namespace tfw::calculus {

/// Samples u(t_m) on t_m = m * tau. Requires tau > 0 and at least 3 samples.
struct TimeSeries {
  double tau = 0.0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double t(std::size_t m) const noexcept { return static_cast<double>(m) * tau; }

  /// Samples fn(t_m) for m = 0..n-1.
  template <class Fn>
  static TimeSeries sample(Fn&& fn, double tau, std::size_t n) {
    TimeSeries ts{tau, std::vector<double>(n)};
    for (std::size_t m = 0; m < n; ++m) ts.values[m] = fn(ts.t(m));
    return ts;
  }
};

/// Riemann-Liouville integral of order alpha > 0 by exact integration of the
/// kernel against the piecewise-linear interpolant. Second order for smooth u.
TimeSeries frac_integral(const TimeSeries& series, double alpha);

/// e^{-nu t} * frac_integral(e^{nu s} u(s)).
TimeSeries tempered_frac_integral(const TimeSeries& series, double alpha, double nu);

/// Caputo derivative of order 1 < alpha < 2.
///
/// Writes D^alpha u(t_m) = Gamma(2-alpha)^{-1} int_0^{t_m} (t_m-s)^{1-alpha} u''(s) ds
/// and replaces u'' on each cell by the difference quotient of nodal slopes
/// p_k ~ u'(t_k) (centred inside, second-order one-sided at the last node).
/// The cell integrals of the kernel are exact. `initial_slope` is u'(0); when
/// absent it is estimated by the second-order forward difference.
TimeSeries caputo(const TimeSeries& series, double alpha,
                  std::optional<double> initial_slope = std::nullopt);

/// e^{-nu t} * caputo(e^{nu s} u(s)). The initial slope of the conjugated
/// series is u'(0) + nu u(0).
TimeSeries tempered_caputo(const TimeSeries& series, double alpha, double nu,
                           std::optional<double> initial_slope = std::nullopt);

}  // namespace tfw::calculus
