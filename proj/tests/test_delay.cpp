#include "selfish/delay_analysis.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace selfish;

namespace {

/// Double integral over t, s in [0, inf) of the catch-up density, by nested adaptive quadrature.
double catchup_by_quadrature(const DelayParams& p) {
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  const double rate = p.alpha * p.lambda;
  const double d = p.d_ah + p.d_ha;
  auto inner = [&](double t) {
    auto f = [&](double s) {
      return rate * rate * std::exp(-rate * (t + s)) * std::exp(-(1.0 - p.alpha) * p.lambda * (t + s + d));
    };
    return gauss_kronrod<double, 61>::integrate(f, 0.0, inf, 15, 1e-13);
  };
  return gauss_kronrod<double, 61>::integrate(inner, 0.0, inf, 15, 1e-13);
}

std::optional<std::uint64_t> scan(double q, double rho, std::uint64_t cap) {
  for (std::uint64_t k = 1; k <= cap; ++k) {
    if ((static_cast<double>(k) + 1.0) * q - rho > 0.0) return k;
  }
  return std::nullopt;
}

} // namespace

TEST_SUITE("delay-analysis") {

TEST_CASE("zero delay reduces to alpha squared") {
  for (double lambda : {0.1, 1.0, 7.0}) {
    const DelayParams p{0.3, lambda, 0.0, 0.0};
    CHECK(catchup_probability(p) == doctest::Approx(0.09).epsilon(1e-15));
    CHECK(std::abs(catchup_by_quadrature(p) - 0.09) <= 1e-8);
  }
  CHECK(catchup_probability({0.0, 1.0, 2.0, 3.0}) == 0.0);
}

TEST_CASE("closed form agrees with quadrature on a grid") {
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const DelayParams p{0.02 + 0.096 * i, 1.3, 0.25 * j, 0.1 * j};
      CHECK(std::abs(catchup_probability(p) - catchup_by_quadrature(p)) <= 1e-8);
    }
  }
}

TEST_CASE("q vanishes for long delays") {
  CHECK(catchup_probability({0.3, 1.0, 500.0, 500.0}) < 1e-300);
}

TEST_CASE("q monotonicity") {
  double prev = 1.0;
  for (double d = 0.0; d < 10.0; d += 0.5) {
    const double q = catchup_probability({0.3, 1.0, d, 0.2});
    CHECK(q <= prev);
    prev = q;
  }
  prev = 1.0;
  for (double d = 0.0; d < 10.0; d += 0.5) {
    const double q = catchup_probability({0.3, 1.0, 0.2, d});
    CHECK(q <= prev);
    prev = q;
  }
  prev = 0.0;
  for (double a = 0.05; a < 1.0; a += 0.05) {
    const double q = catchup_probability({a, 2.0, 0.3, 0.3});
    CHECK(q > prev);
    prev = q;
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(catchup_probability({0.3, 0.0, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(catchup_probability({0.3, 1.0, -1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(catchup_probability({1.0, 1.0, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(min_profitable_k({0.3, 1.0, 0.0, 0.0}, 0.3, 0), std::invalid_argument);
}

TEST_CASE("deviation gain") {
  CHECK(deviation_gain(3, 0.09, 0.3).lower_bound == doctest::Approx(0.06));
  CHECK(deviation_gain(2, 0.09, 0.3).lower_bound == doctest::Approx(-0.03));
  CHECK(deviation_gain(1, 0.5, 0.3).lower_bound == doctest::Approx(0.7));
  const DeviationGain g = deviation_gain(4, 0.2, 0.3);
  CHECK(g.full == doctest::Approx(0.2 * 0.7 * 5 - 0.8 * 0.3 * 5 + 0.3 * 4));
  // With rho_h = rho_k the full expression dominates the bound.
  for (int k = 1; k < 50; ++k) {
    for (double q : {0.0, 0.01, 0.2, 0.7}) {
      for (double rho : {0.0, 0.3, 0.9, 1.0}) {
        const DeviationGain d = deviation_gain(k, q, rho);
        CHECK(d.full >= d.lower_bound - 1e-12);
      }
    }
  }
}

TEST_CASE("min profitable k against a brute-force scan") {
  CHECK(min_profitable_k({0.3, 1.0, 0.0, 0.0}, 0.3) == std::optional<std::uint64_t>(3));
  const double d = 1.0 / 0.9;
  const DelayParams p{0.1, 1.0, d, 0.0};
  CHECK(catchup_probability(p) == doctest::Approx(0.01 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(min_profitable_k(p, 0.1) == std::optional<std::uint64_t>(27));
  CHECK_FALSE(min_profitable_k({0.0, 1.0, 0.0, 0.0}, 0.3).has_value());
  for (double alpha : {0.05, 0.13, 0.3, 0.49, 0.7}) {
    for (double delay : {0.0, 0.4, 3.0}) {
      for (double rho : {0.0, 0.05, 0.3, 0.5, 0.9}) {
        const DelayParams dp{alpha, 1.7, delay, delay / 2};
        CHECK(min_profitable_k(dp, rho, 100'000) == scan(catchup_probability(dp), rho, 100'000));
      }
    }
  }
  // Exact boundary: (k+1) q = rho must not count as profitable.
  CHECK(min_profitable_k({0.5, 1.0, 0.0, 0.0}, 0.5) == std::optional<std::uint64_t>(2));
  CHECK_FALSE(min_profitable_k({0.1, 1.0, 10.0, 0.0}, 0.3, 10).has_value());
}

TEST_CASE("the threshold vanishes under any finite delay") {
  for (int i = 1; i <= 9; ++i) {
    const double alpha = 0.05 * i;
    for (double delay : {0.1, 1.0, 5.0}) {
      CHECK(min_profitable_k({alpha, 1.0, delay, delay}, alpha).has_value());
    }
  }
}

}
