#include "doctest.h"

#include <cmath>

#include "mpfr_oracle.hpp"
#include "tfw/calculus.hpp"
#include "tfw/special.hpp"

namespace calc = tfw::calculus;
using calc::TimeSeries;
using tfw::testing::mpfr_gamma_d;

TEST_CASE("frac_integral of constants and of t") {
  const double tau = 1.0 / 64;
  const auto one = TimeSeries::sample([](double) { return 1.0; }, tau, 65);
  const auto i1 = calc::frac_integral(one, 1.0);
  for (std::size_t m = 0; m < i1.size(); ++m) CHECK(i1.values[m] == doctest::Approx(i1.t(m)).epsilon(1e-14));

  const auto ih = calc::frac_integral(one, 0.5);
  const double g15 = mpfr_gamma_d(1.5);
  for (std::size_t m = 1; m < ih.size(); ++m)
    CHECK(std::fabs(ih.values[m] - std::sqrt(ih.t(m)) / g15) < 1e-13);

  const auto lin = TimeSeries::sample([](double t) { return t; }, 1.0 / 512, 513);
  const auto i18 = calc::frac_integral(lin, 1.8);
  CHECK(std::fabs(i18.values.back() - 1.0 / mpfr_gamma_d(3.8)) < 1e-13);
  CHECK(std::fabs(i18.values.back() - 0.2130300146886577) < 1e-13);
}

TEST_CASE("frac_integral is second order for smooth data") {
  auto err = [](int n) {
    const auto s = TimeSeries::sample([](double t) { return std::sin(3.0 * t); }, 1.0 / n, n + 1);
    const auto i = calc::frac_integral(s, 0.7);
    // oracle: sum_k (-1)^k 3^{2k+1} t^{2k+1+a} / Gamma(2k+2+a)
    const double t = 1.0, a = 0.7;
    double ref = 0.0;
    for (int k = 0; k < 30; ++k)
      ref += std::pow(-1.0, k) * std::pow(3.0, 2 * k + 1) * std::pow(t, 2 * k + 1 + a) / mpfr_gamma_d(2 * k + 2 + a);
    return std::fabs(i.values.back() - ref);
  };
  const double e1 = err(64), e2 = err(128), e3 = err(256);
  CHECK(std::log2(e1 / e2) > 1.8);
  CHECK(std::log2(e2 / e3) > 1.8);
}

TEST_CASE("semigroup of fractional integrals") {
  const int n = 256;
  const double tau = 1.0 / n;
  // sin vanishes at 0, so the inner integral is C^1 and the outer quadrature
  // keeps its second order.
  const auto s = TimeSeries::sample([](double t) { return std::sin(t); }, tau, n + 1);
  const auto twice = calc::frac_integral(calc::frac_integral(s, 0.4), 0.9);
  const auto once = calc::frac_integral(s, 1.3);
  for (std::size_t m = 0; m < once.size(); ++m) CHECK(std::fabs(twice.values[m] - once.values[m]) < 10.0 * tau * tau);
}

TEST_CASE("tempered_frac_integral") {
  const double tau = 1.0 / 128;
  const auto one = TimeSeries::sample([](double) { return 1.0; }, tau, 129);
  const auto i = calc::tempered_frac_integral(one, 1.0, 2.0);
  CHECK(std::fabs(i.values.back() - 0.5 * (1.0 - std::exp(-2.0))) < 1e-5);

  const double nu = 1.5, a = 0.6;
  const auto decay = TimeSeries::sample([nu](double t) { return std::exp(-nu * t); }, tau, 129);
  const auto id = calc::tempered_frac_integral(decay, a, nu);
  for (std::size_t m = 1; m < id.size(); ++m) {
    const double t = id.t(m);
    CHECK(std::fabs(id.values[m] - std::exp(-nu * t) * std::pow(t, a) / mpfr_gamma_d(a + 1.0)) < 1e-12);
  }

  const auto plain = calc::frac_integral(decay, a);
  const auto zero_nu = calc::tempered_frac_integral(decay, a, 0.0);
  CHECK(plain.values == zero_nu.values);
}

TEST_CASE("caputo of t and t^2") {
  const double tau = 1.0 / 128;
  const auto lin = TimeSeries::sample([](double t) { return t; }, tau, 129);
  const auto d1 = calc::caputo(lin, 1.8);
  for (double v : d1.values) CHECK(std::fabs(v) < 1e-12);

  const auto sq = TimeSeries::sample([](double t) { return t * t; }, tau, 129);
  const auto d2 = calc::caputo(sq, 1.8, 0.0);
  const double g12 = mpfr_gamma_d(1.2);
  for (std::size_t m = 1; m < d2.size(); ++m)
    CHECK(std::fabs(d2.values[m] - 2.0 * std::pow(d2.t(m), 0.2) / g12) < 1e-10);
}

TEST_CASE("caputo eigenrelation with the Mittag-Leffler function") {
  const double a = 1.8;
  auto err = [a](int n) {
    const auto u = TimeSeries::sample([a](double t) { return tfw::special::ml(a, 1.0, -std::pow(t, a)); }, 1.0 / n, n + 1);
    const auto d = calc::caputo(u, a, 0.0);
    return std::fabs(d.values.back() + tfw::special::ml(a, 1.0, -1.0));
  };
  const double e1 = err(128), e2 = err(512);
  CHECK(e2 < 2e-3);
  CHECK(std::log2(e1 / e2) / 2.0 > 1.0);  // at least O(tau^{3-a}) = O(tau^1.2)
}

TEST_CASE("caputo inverts the fractional integral") {
  const double a = 1.6;
  for (int n : {64, 256}) {
    const double tau = 1.0 / n;
    // smooth with u(0) = u'(0) = 0
    const auto u = TimeSeries::sample([](double t) { return t * t * std::exp(t); }, tau, n + 1);
    const auto back = calc::caputo(calc::frac_integral(u, a), a, 0.0);
    double worst = 0.0;
    for (std::size_t m = 2; m < u.size(); ++m) worst = std::max(worst, std::fabs(back.values[m] - u.values[m]));
    CHECK(worst < 10.0 * std::pow(tau, 3.0 - a));
  }
}

TEST_CASE("tempered_caputo") {
  const double tau = 1.0 / 256, nu = 1.0, a = 1.8;
  const auto lin = TimeSeries::sample([nu](double t) { return std::exp(-nu * t) * t; }, tau, 257);
  const auto d = calc::tempered_caputo(lin, a, nu, 1.0);
  for (double v : d.values) CHECK(std::fabs(v) < 1e-10);

  const auto u = TimeSeries::sample(
      [nu, a](double t) { return std::exp(-nu * t) * tfw::special::ml(a, 1.0, -std::pow(t, a)); }, tau, 257);
  const auto du = calc::tempered_caputo(u, a, nu, -nu);
  CHECK(std::fabs(du.values.back() + std::exp(-1.0) * tfw::special::ml(a, 1.0, -1.0)) < 2e-3);

  const auto plain = calc::caputo(u, a, -nu);
  const auto zero_nu = calc::tempered_caputo(u, a, 0.0, -nu);
  CHECK(plain.values == zero_nu.values);
}

TEST_CASE("caputo preconditions") {
  TimeSeries tiny{0.1, {0.0, 1.0}};
  CHECK_THROWS(calc::caputo(tiny, 1.5));
  const auto s = TimeSeries::sample([](double t) { return t; }, 0.1, 5);
  CHECK_THROWS(calc::caputo(s, 2.5));
  CHECK_THROWS(calc::frac_integral(s, -1.0));
}
