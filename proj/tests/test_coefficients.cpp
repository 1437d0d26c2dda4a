#include <doctest.h>

#include <random>

#include "homog/coefficients.hpp"

using namespace homog;

TEST_CASE("evaluate: constants, substitution and periodic wrap") {
  const auto c = make_coefficient("constant", 2, {{"c", 2.0}});
  CHECK(evaluate(c, {0.3, 0.1}, {-0.2, 0.4}) == Mat::identity(2, 2.0));

  const auto t = make_coefficient("trig_product", 1);
  CHECK(evaluate(t, {0.0, 0.0}, {0.0, 0.0})(0, 0) == doctest::Approx(9.0));

  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& name : catalog_names()) {
    const auto f = make_coefficient(name, 2);
    for (int s = 0; s < 100; ++s) {
      const Vec y{u(rng), u(rng)}, z{u(rng), u(rng)};
      const Mat a = evaluate(f, y, z);
      const Mat b = evaluate(f, {y[0] + 1.0, y[1] - 2.0}, {z[0] - 2.0, z[1] + 3.0});
      for (std::size_t i = 0; i < 4; ++i) CHECK(a.m[i] == doctest::Approx(b.m[i]).epsilon(1e-12));
      // pure: bitwise repeatable
      CHECK(evaluate(f, y, z) == a);
    }
  }
}

TEST_CASE("every catalog entry satisfies its declared hypotheses") {
  for (const auto& name : catalog_names())
    for (int d : {1, 2}) {
      if (name == "skew_trig" && d == 1) continue;
      const auto f = make_coefficient(name, d);
      const auto rep = verify_hypotheses(f, 4000);
      INFO(name << " d=" << d);
      CHECK(rep.pass);
      CHECK(rep.mu_observed >= f.mu - 1e-12);
      CHECK(rep.cL_observed <= f.lipschitz_y + 1e-12);
    }
}

TEST_CASE("hypothesis violations are reported with a witness") {
  auto f = make_coefficient("constant", 2, {{"c", 2.0}});
  CHECK(verify_hypotheses(f, 10).pass);
  CHECK(verify_hypotheses(f, 10).mu_observed == doctest::Approx(2.0));
  f.mu = 3.0;
  const auto rep = verify_hypotheses(f, 10);
  CHECK_FALSE(rep.pass);
  REQUIRE_FALSE(rep.violations.empty());
  CHECK(rep.violations.front().check == "ellipticity");
  CHECK(rep.violations.front().value == doctest::Approx(2.0));
}

TEST_CASE("trig_product extrema by direct scan") {
  const auto f = make_coefficient("trig_product", 1);
  double lo = 1e9, hi = 0.0;
  for (int i = 0; i <= 200; ++i)
    for (int k = 0; k <= 200; ++k) {
      const double v = evaluate(f, {-0.5 + i / 200.0, 0}, {-0.5 + k / 200.0, 0})(0, 0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  CHECK(lo == doctest::Approx(1.0));
  CHECK(hi == doctest::Approx(9.0));
  CHECK(lo >= f.mu);
  CHECK(hi <= 1.0 / f.mu + 1e-12);
}

TEST_CASE("unknown names and bad dimensions are configuration errors") {
  CHECK_THROWS_AS(make_coefficient("nope", 1), ConfigError);
  CHECK_THROWS_AS(make_coefficient("trig_product", 3), ConfigError);
  CHECK_THROWS_AS(make_coefficient("skew_trig", 1), ConfigError);
}

TEST_CASE("scale coupling stores tau and detects a vanishing ratio") {
  const auto c = ScaleCoupling::power_law(2.0, {0.125, 0.0625, 0.03125});
  CHECK(c.deltas[0] == doctest::Approx(0.015625));
  CHECK(c.taus[1] == doctest::Approx(0.0625));
  CHECK(c.ratio_decreasing());
  const auto s = ScaleCoupling::power_law(1.5, {0.25, 0.0625});
  CHECK(s.taus[1] == doctest::Approx(0.25));
  CHECK_FALSE(ScaleCoupling::power_law(0.5, {0.25, 0.0625}).ratio_decreasing());
}
