#include "tfw/calculus.hpp"

#include <cmath>
#include <stdexcept>

#include "tfw/special.hpp"

namespace tfw::calculus {

namespace {

void check_series(const TimeSeries& s) {
  if (!(s.tau > 0.0)) throw std::invalid_argument("time series: tau must be positive");
  if (s.values.size() < 3) throw std::invalid_argument("time series: at least 3 samples required");
}

TimeSeries conjugate(const TimeSeries& s, double nu) {
  TimeSeries out = s;
  for (std::size_t m = 0; m < s.size(); ++m) out.values[m] *= std::exp(nu * s.t(m));
  return out;
}

void unconjugate(TimeSeries& s, double nu) {
  for (std::size_t m = 0; m < s.size(); ++m) s.values[m] *= std::exp(-nu * s.t(m));
}

}  // namespace

TimeSeries frac_integral(const TimeSeries& series, double alpha) {
  check_series(series);
  if (!(alpha > 0.0)) throw std::invalid_argument("frac_integral: alpha must be positive");
  const std::size_t n = series.size();
  const auto& u = series.values;

  // c[j] = j^{alpha+1}; a(j) for interior nodes depends only on m - j.
  std::vector<double> c(n + 1);
  for (std::size_t j = 0; j <= n; ++j) c[j] = std::pow(static_cast<double>(j), alpha + 1.0);

  const double scale = std::pow(series.tau, alpha) * special::rgamma(alpha + 2.0);
  TimeSeries out{series.tau, std::vector<double>(n, 0.0)};
  for (std::size_t m = 1; m < n; ++m) {
    const double md = static_cast<double>(m);
    double acc = (c[m - 1] - (md - alpha - 1.0) * std::pow(md, alpha)) * u[0];
    for (std::size_t j = 1; j < m; ++j) {
      const std::size_t d = m - j;
      acc += (c[d + 1] - 2.0 * c[d] + c[d - 1]) * u[j];
    }
    acc += u[m];
    out.values[m] = scale * acc;
  }
  return out;
}

TimeSeries tempered_frac_integral(const TimeSeries& series, double alpha, double nu) {
  if (nu < 0.0) throw std::invalid_argument("tempered_frac_integral: nu must be non-negative");
  TimeSeries out = frac_integral(conjugate(series, nu), alpha);
  unconjugate(out, nu);
  return out;
}

TimeSeries caputo(const TimeSeries& series, double alpha, std::optional<double> initial_slope) {
  check_series(series);
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("caputo: alpha must lie in (1, 2)");
  const std::size_t n = series.size();
  const auto& u = series.values;
  const double tau = series.tau;

  const double p0 = initial_slope ? *initial_slope : (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * tau);

  // Interior slopes (centred); p_end(m) is the slope used at the evaluation node.
  std::vector<double> p(n, 0.0);
  p[0] = p0;
  for (std::size_t k = 1; k + 1 < n; ++k) p[k] = (u[k + 1] - u[k - 1]) / (2.0 * tau);
  auto p_end = [&](std::size_t m) {
    if (m == 1) return 2.0 * (u[1] - u[0]) / tau - p0;
    return (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) / (2.0 * tau);
  };

  std::vector<double> b(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double jd = static_cast<double>(j);
    b[j] = std::pow(jd + 1.0, 2.0 - alpha) - std::pow(jd, 2.0 - alpha);
  }

  const double scale = std::pow(tau, 1.0 - alpha) * special::rgamma(3.0 - alpha);
  TimeSeries out{tau, std::vector<double>(n, 0.0)};
  for (std::size_t m = 1; m < n; ++m) {
    double acc = 0.0;
    for (std::size_t k = 1; k < m; ++k) acc += b[m - k] * (p[k] - p[k - 1]);
    acc += b[0] * (p_end(m) - p[m - 1]);
    out.values[m] = scale * acc;
  }
  return out;
}

TimeSeries tempered_caputo(const TimeSeries& series, double alpha, double nu,
                           std::optional<double> initial_slope) {
  if (nu < 0.0) throw std::invalid_argument("tempered_caputo: nu must be non-negative");
  check_series(series);
  std::optional<double> slope;
  if (initial_slope) slope = *initial_slope + nu * series.values[0];
  TimeSeries out = caputo(conjugate(series, nu), alpha, slope);
  unconjugate(out, nu);
  return out;
}

}  // namespace tfw::calculus
