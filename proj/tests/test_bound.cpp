#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "hombridge/bound.hpp"
#include "oracles.hpp"

using namespace hombridge;

TEST_CASE("admissibility") {
  const auto ex = NonlinearitySpec::exponential();
  CHECK(admissible(ex, 1.0));
  CHECK_FALSE(admissible(ex, std::sqrt(2.0)));
  CHECK_FALSE(admissible(ex, 0.0));
  CHECK_FALSE(admissible(ex, -1.0));
  CHECK_THROWS_AS(lower_bound_L(ex, 1.5), InadmissibleSpeed);
  CHECK_THROWS_AS(lower_bound_L(ex, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("piecewise bound is 4/c^4") {
  const auto pw = NonlinearitySpec::piecewise();
  for (double c : {0.7, 0.8, 0.9, 1.0, 1.2, 1.3, 1.35}) {
    const auto r = lower_bound_L(pw, c);
    REQUIRE(r.value.has_value());
    CHECK(std::abs(*r.value - 4 / std::pow(c, 4)) <= 1e-9 * (4 / std::pow(c, 4)));
    CHECK(r.threshold == doctest::Approx(std::pow(c, 4) / 4).epsilon(1e-15));
    REQUIRE(r.bracket.has_value());
    CHECK(r.bracket->first <= *r.value);
    CHECK(r.bracket->second == *r.value);
  }
}

TEST_CASE("exponential bound solves (1 - e^-d)/d = c^4/4") {
  const auto ex = NonlinearitySpec::exponential();
  for (double c : {0.7, 0.8, 0.9, 1.0, 1.2, 1.3, 1.35}) {
    const double want = oracle::exponential_bound(c);
    const auto r = lower_bound_L(ex, c);
    REQUIRE(r.value.has_value());
    CHECK(std::abs(*r.value - want) <= 1e-9 * want);
  }
  // high-precision reference values
  CHECK(*lower_bound_L(ex, 1.0).value == doctest::Approx(3.9206903948728863).epsilon(1e-11));
  CHECK(*lower_bound_L(ex, 1.3).value == doctest::Approx(0.71624374594884323).epsilon(1e-11));
}

TEST_CASE("bound agrees with a brute-force scan") {
  const auto pw = NonlinearitySpec::piecewise();
  const auto ex = NonlinearitySpec::exponential();
  for (double c : {0.8, 1.0, 1.2}) {
    const double t = std::pow(c, 4) / 4;
    const double want_pw = oracle::brute_force_bound([](double u) { return std::max(u, -1.0); }, t, 64.0);
    const double want_ex = oracle::brute_force_bound([](double u) { return std::expm1(u); }, t, 64.0);
    CHECK(std::abs(*lower_bound_L(pw, c).value - want_pw) <= 1e-9 * want_pw);
    CHECK(std::abs(*lower_bound_L(ex, c).value - want_ex) <= 1e-9 * want_ex);
  }
}

TEST_CASE("bracket invariant: ratio holds below, fails just above") {
  for (const auto& spec : {NonlinearitySpec::piecewise(), NonlinearitySpec::exponential(),
                           parse_nonlinearity("u - abs(u)*u")}) {
    for (double c : {0.8, 1.0, 1.3}) {
      const auto r = lower_bound_L(spec, c);
      REQUIRE(r.value.has_value());
      const double d = *r.value;
      for (int i = 1; i <= 2000; ++i) {
        const double u = d * (1 - 1e-9) * i / 2000.0;
        CHECK(spec.value(u) / u > r.threshold);
        CHECK(spec.value(-u) / -u > r.threshold);
      }
      bool violated = false;
      for (int i = 0; i <= 100 && !violated; ++i) {
        const double u = d * (1 + 1e-6 * i / 100.0);
        violated = spec.value(u) / u <= r.threshold || spec.value(-u) / -u <= r.threshold;
      }
      CHECK(violated);
    }
  }
}

TEST_CASE("positive-side violation is found") {
  // u - u^2 for u>0 has ratio 1-u, dropping below 1/4 at u = 3/4; the
  // negative side never violates.
  const auto spec = parse_nonlinearity("u - max(u,0)^2");
  const auto r = lower_bound_L(spec, 1.0);
  REQUIRE(r.value.has_value());
  CHECK(*r.value == doctest::Approx(0.75).epsilon(1e-11));
}

TEST_CASE("linear f is unbounded; nonexistence predicate") {
  const auto lin = parse_nonlinearity("u");
  CHECK(lower_bound_L(lin, 1.0).unbounded());
  CHECK(nonexistence_predicate(lin, 1.0, 1e6));
  CHECK_FALSE(nonexistence_predicate(NonlinearitySpec::exponential(), 1.0, 1e6));
  CHECK_FALSE(nonexistence_predicate(NonlinearitySpec::piecewise(), 1.0, 1e6));
  CHECK_THROWS_AS(nonexistence_predicate(lin, 2.0), InadmissibleSpeed);
}

TEST_CASE("bound grows as c decreases") {
  for (const auto& spec : {NonlinearitySpec::piecewise(), NonlinearitySpec::exponential()}) {
    double prev = 0;
    for (double c = 1.40; c >= 0.3; c -= 0.05) {
      const double l = *lower_bound_L(spec, c).value;
      CHECK(l >= prev);
      prev = l;
    }
    CHECK(*lower_bound_L(spec, 0.3).value > *lower_bound_L(spec, 0.6).value);
    CHECK(*lower_bound_L(spec, 0.6).value > *lower_bound_L(spec, 1.0).value);
    CHECK(*lower_bound_L(spec, 1.0).value > *lower_bound_L(spec, 1.3).value);
  }
  const auto pw = NonlinearitySpec::piecewise();
  for (double c = 0.3; c < 1.41; c += 0.05) CHECK(*lower_bound_L(pw, c).value >= 4 / std::pow(c, 4) - 1e-9);
}

TEST_CASE("tail parameters") {
  const auto tp = tail_parameters(1.0, 1.0);
  CHECK(tp.rho == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tp.omega == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-14));
  const auto small = tail_parameters(1.0, 1e-8);
  CHECK(small.rho == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(small.omega == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(tail_parameters(1.0, std::sqrt(2.0)), InadmissibleSpeed);
  CHECK_THROWS_AS(tail_parameters(NonlinearitySpec::exponential(), 1.5), InadmissibleSpeed);

  // Compare against the roots of the quartic found independently.
  const auto roots = oracle::decaying_tail_root(1.0, 1.0);
  CHECK(tp.rho == doctest::Approx(roots.real()).epsilon(1e-12));
  CHECK(tp.omega == doctest::Approx(roots.imag()).epsilon(1e-12));
}

TEST_CASE("tail root invariants on random admissible pairs") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> fp(0.05, 20.0), frac(0.01, 0.99);
  for (int i = 0; i < 50; ++i) {
    const double f0 = fp(rng);
    const double c = std::pow(frac(rng) * 4 * f0, 0.25);
    const auto tp = tail_parameters(f0, c);
    CHECK(tp.rho > 0);
    const std::complex<double> l(tp.rho, tp.omega);
    CHECK(std::abs(std::pow(l, 4) + c * c * l * l + f0) <= 1e-10 * f0);
    CHECK(std::abs(tp.rho * tp.rho + tp.omega * tp.omega - std::sqrt(f0)) <= 1e-10 * std::sqrt(f0));
  }
}
