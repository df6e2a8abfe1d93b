#include <doctest.h>

#include <cmath>
#include <random>

#include "fdlab/errors.hpp"
#include "fdlab/exponents.hpp"

using namespace fdlab;

TEST_CASE("rational parsing and normalization") {
  CHECK(Rational::parse("1/4") == Rational::make(1, 4));
  CHECK(Rational::parse("-2/8") == Rational::make(-1, 4));
  CHECK(Rational::parse("0.25") == Rational::make(1, 4));
  CHECK(Rational::parse("-1e-1") == Rational::make(-1, 10));
  CHECK(Rational::parse("3") == Rational::make(3, 1));
  CHECK(Rational::parse("2/-4") == Rational::make(-1, 2));
  CHECK_FALSE(Rational::parse("1/0"));
  CHECK_FALSE(Rational::parse("abc"));
  CHECK_FALSE(Rational::parse(""));
  CHECK(Rational::make(6, 8).str() == "3/4");
}

TEST_CASE("exponents for n=6, m=0 match hand values") {
  const ExponentSet e = derive_exponents(6, 0.0);
  CHECK(e.mu == 2.0);
  CHECK(e.beta == 0.25);
  CHECK(e.m_c == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(e.m_star == 0.5);
  CHECK(e.l_star == 5.0);
  CHECK(e.alpha_star == 1.0);
  CHECK(e.l_min() == 4.0);
}

TEST_CASE("exponents from an exact rational m") {
  const ExponentSet e = derive_exponents(6, Rational::make(1, 4));
  CHECK(e.mu == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(e.l_star == doctest::Approx((6.0 + 8.0 / 3.0 + 2.0) / 2.0).epsilon(1e-15));
  CHECK(e.alpha_star == doctest::Approx(std::pow(6.0 - 8.0 / 3.0 - 2.0, 2) / 4.0).epsilon(1e-15));
  REQUIRE(e.m_exact);
  CHECK(e.m_exact->str() == "1/4");
}

TEST_CASE("regime violations are rejected with the bound in the message") {
  CHECK_THROWS_AS(derive_exponents(2, 0.0), PreconditionError);
  CHECK_THROWS_AS(derive_exponents(6, 0.5), PreconditionError);
  CHECK_THROWS_AS(derive_exponents(6, 0.7), PreconditionError);
  try {
    derive_exponents(6, 0.5);
  } catch (const PreconditionError& err) {
    CHECK(std::string(err.what()).find("m must be < m_star=0.5") != std::string::npos);
  }
}

TEST_CASE("structural identities hold across the regime") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(5, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const int n = dim(rng);
    const double m_star = (n - 4.0) / (n - 2.0);
    const double m = -2.0 + (m_star + 2.0) * u(rng) * 0.999;
    const ExponentSet e = derive_exponents(n, m);
    CHECK(e.mu == doctest::Approx(2.0 / (1.0 - m)));
    // n - mu - 2 > 0 below m_star, and l_star sits halfway between mu+2 and n.
    CHECK(e.n - e.mu - 2.0 > 0.0);
    CHECK(e.l_star == doctest::Approx(0.5 * (e.l_min() + e.n)));
    CHECK(rate_of_l(e.l_star, e) == doctest::Approx(e.alpha_star));
    CHECK(e.m_star < e.m_c);
  }
}

TEST_CASE("l_of_alpha inverts rate_of_l on (mu+2, l_star]") {
  const ExponentSet e = derive_exponents(6, 0.0);
  for (double l = 4.05; l <= 5.0; l += 0.05) {
    CHECK(l_of_alpha(rate_of_l(l, e), e) == doctest::Approx(l).epsilon(1e-12));
  }
  CHECK(rate_of_l(4.5, e) == 0.75);
  CHECK(rate_of_l(4.2, e) == doctest::Approx(0.36).epsilon(1e-14));
  CHECK_THROWS_AS(rate_of_l(3.9, e), PreconditionError);
  CHECK_THROWS_AS(l_of_alpha(1.2, e), PreconditionError);
}

TEST_CASE("rate is increasing in l up to l_star") {
  const ExponentSet e = derive_exponents(8, 0.2);
  double prev = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double l = e.l_min() + (e.l_star - e.l_min()) * k / 100.0;
    const double r = rate_of_l(l, e);
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("profile values") {
  const ExponentSet e = derive_exponents(6, 0.0);
  CHECK(profile_value({1.0, e}, 0.0) == 1.0);
  CHECK(profile_value({1.0, e}, 1.0) == 0.5);
  CHECK(profile_value({0.0, e}, 2.0) == 0.25);
}

TEST_CASE("self-similar change of variables round trips") {
  const ExponentSet e = derive_exponents(6, 0.25);
  const SelfSimilarFrame f{2.0, e};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> y(0.0, 5.0), tau(0.0, 1.9), u(0.1, 3.0);
  for (int k = 0; k < 100; ++k) {
    const double y0 = y(rng), t0 = tau(rng), u0 = u(rng);
    const SelfSimilarPoint p = to_selfsimilar(y0, t0, u0, f);
    const OriginalPoint q = from_selfsimilar(p.x, p.t, p.v, f);
    CHECK(q.y == doctest::Approx(y0).epsilon(1e-12));
    CHECK(q.tau == doctest::Approx(t0).epsilon(1e-12));
    CHECK(q.u == doctest::Approx(u0).epsilon(1e-12));
  }
}
