#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tailagg/errors.hpp"
#include "tailagg/gpd.hpp"
#include "tailagg/tailpredict.hpp"

using namespace tailagg;

namespace {

MarginPair mp(double s1, double x1, double s2, double x2) { return {{s1, x1}, {s2, x2}}; }

LtDescriptor lt(double eta, LtCondition c, std::optional<double> kappa = {}) { return {eta, kappa, c}; }

}  // namespace

TEST_CASE("equal shapes") {
  const auto heavy = predict_theorem(mp(1, 0.5, 1, 0.5), lt(0.7, LtCondition::Cond2, 0.1));
  CHECK(heavy.regime == TailRegime::Heavy);
  CHECK(*heavy.xi_R == 0.5);
  CHECK(std::isinf(heavy.r_F));

  const auto b = predict_theorem(mp(1, -0.2, 1, -0.2), lt(0.75, LtCondition::Cond2, 0.0));
  CHECK(b.regime == TailRegime::Bounded);
  CHECK(*b.xi_R == doctest::Approx(-0.15).epsilon(1e-15));
  CHECK(b.r_F == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(b.prefactor_class == PrefactorClass::Constant);
}

TEST_CASE("zero shapes") {
  const auto e = predict_theorem(mp(1, 0, 2, 0), lt(0.75, LtCondition::Cond1));
  CHECK(e.regime == TailRegime::Exponential);
  CHECK(*e.sigma_R == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(e.prefactor_class == PrefactorClass::Constant);
  CHECK_FALSE(e.xi_R.has_value());

  const auto eq = predict_theorem(mp(1.5, 0, 1.5, 0), lt(0.6, LtCondition::Cond1));
  CHECK(*eq.sigma_R == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(eq.prefactor_class == PrefactorClass::LinearInR);

  const auto dep = predict_theorem(mp(1, 0, 2, 0), lt(1.0, LtCondition::Cond3a));
  CHECK(*dep.sigma_R == 3.0);
  CHECK_THROWS_AS(predict_theorem(mp(1, 0, 2, 0), lt(0.8, LtCondition::Cond3a)), PredictionError);
  CHECK_THROWS_AS(predict_theorem(mp(1, 0, 2, 0), lt(0.8, LtCondition::Cond2, 0.0)), PredictionError);
}

TEST_CASE("unequal negative shapes") {
  const auto c2 = predict_theorem(mp(1, -0.2, 1, -0.4), lt(0.5, LtCondition::Cond2, 0.0));
  CHECK(*c2.xi_R == doctest::Approx(-2.0 / 15.0).epsilon(1e-14));
  CHECK(c2.r_F == doctest::Approx(5.0 + 2.5).epsilon(1e-15));

  // kappa shifts weight toward the larger shape.
  const double eta = 0.8, kappa = 0.3;
  const auto k = predict_theorem(mp(1, -0.2, 2, -0.5), lt(eta, LtCondition::Cond2, kappa));
  const double inv = (1 / (2 * eta) + kappa) / -0.2 + (1 / (2 * eta) - kappa) / -0.5;
  CHECK(*k.xi_R == doctest::Approx(1.0 / inv).epsilon(1e-14));

  const auto c3 = predict_theorem(mp(1, -0.2, 1, -0.4), lt(0.9, LtCondition::Cond3b));
  CHECK(*c3.xi_R == doctest::Approx(0.9 * -0.2).epsilon(1e-15));
  CHECK_THROWS_AS(predict_theorem(mp(1, -0.2, 1, -0.4), lt(0.9, LtCondition::Cond2)), PredictionError);
}

TEST_CASE("mixed shapes need no dependence information") {
  const LtDescriptor none{std::nullopt, std::nullopt, LtCondition::Cond2};
  const auto h = predict_theorem(mp(1, 0.3, 1, -0.2), none);
  CHECK(h.regime == TailRegime::Heavy);
  CHECK(*h.xi_R == 0.3);

  const auto z = predict_theorem(mp(1, 0, 1, -0.5), none);
  CHECK(z.regime == TailRegime::Exponential);
  CHECK(*z.sigma_R == 1.0);
  CHECK(z.prefactor_class == PrefactorClass::IntervalConstant);
  REQUIRE(z.c_bounds.has_value());
  CHECK(z.c_bounds->first == 1.0);
  CHECK(z.c_bounds->second == doctest::Approx(std::exp(2.0)).epsilon(1e-14));

  // Index order does not matter: the zero-shape margin carries the scale.
  const auto swapped = predict_theorem(mp(3, -0.25, 2, 0), none);
  CHECK(*swapped.sigma_R == 2.0);
  CHECK(swapped.c_bounds->second == doctest::Approx(std::exp(3.0 / (2.0 * 0.25))).epsilon(1e-14));
}

TEST_CASE("descriptor validation") {
  CHECK_THROWS_AS(predict_theorem(mp(1, 0, 1, 0), lt(1.2, LtCondition::Cond1)), InvalidArgument);
  CHECK_THROWS_AS(predict_theorem(mp(1, -0.2, 1, -0.4), lt(0.5, LtCondition::Cond2, 1.0)), InvalidArgument);
  CHECK_THROWS_AS(predict_theorem(mp(1, -0.2, 1, -0.2), lt(0.5, LtCondition::Cond1)), PredictionError);
  const LtDescriptor none{std::nullopt, std::nullopt, LtCondition::Cond2};
  CHECK_THROWS_AS(predict_theorem(mp(1, 0, 1, 0), none), PredictionError);
  CHECK_THROWS_AS(predict_theorem(mp(1, 0.2, 1, 0.2), lt(0.8, LtCondition::Cond3a)), PredictionError);
  CHECK(parse_condition("3b") == LtCondition::Cond3b);
  CHECK(parse_condition("cond1") == LtCondition::Cond1);
  CHECK_THROWS_AS(parse_condition("cond4"), InvalidArgument);
}

TEST_CASE("copula table: zero shapes against closed forms") {
  for (double s1 : {1.0, 2.0}) {
    for (double s2 : {1.0, 2.0}) {
      const auto m = mp(s1, 0, s2, 0);
      CHECK(*predict_copula(m, CopulaSpec::independence()).sigma_R == std::max(s1, s2));
      CHECK(*predict_copula(m, CopulaSpec::perfect_positive()).sigma_R == s1 + s2);
      for (double t : {0.3, 0.5, 0.9}) {
        CHECK(*predict_copula(m, CopulaSpec::logistic(t)).sigma_R == s1 + s2);
        const auto il = predict_copula(m, CopulaSpec::inverted_logistic(t));
        CHECK(*il.sigma_R == doctest::Approx(oracle::inverted_logistic_sigma_R_closed(t, s1, s2)).epsilon(1e-9));
        const auto g = predict_copula(m, CopulaSpec::gaussian(t));
        CHECK(*g.sigma_R == doctest::Approx(oracle::gaussian_sigma_R_closed(t, s1, s2)).epsilon(1e-9));
      }
    }
  }
  CHECK_THROWS_AS(predict_copula(mp(1, 0, 1, 0), CopulaSpec::perfect_negative()), PredictionError);
}

TEST_CASE("copula table: unequal negative shapes against closed forms") {
  const double x1 = -0.2, x2 = -0.4;
  const auto m = mp(1, x1, 2, x2);
  const double r_F = 1 / 0.2 + 2 / 0.4;
  const auto ind = predict_copula(m, CopulaSpec::independence());
  CHECK(*ind.xi_R == doctest::Approx(-2.0 / 15.0).epsilon(1e-14));
  CHECK(ind.r_F == doctest::Approx(r_F).epsilon(1e-15));
  CHECK(*predict_copula(m, CopulaSpec::logistic(0.5)).xi_R == x1);
  CHECK(*predict_copula(m, CopulaSpec::perfect_positive()).xi_R == x1);
  for (double t : {0.3, 0.5, 0.9}) {
    const double v = std::pow(std::pow(0.2, -1 / t) + std::pow(0.4, -1 / t), t);
    CHECK(*predict_copula(m, CopulaSpec::inverted_logistic(t)).xi_R == doctest::Approx(-1 / v).epsilon(1e-12));
    const double g = (1 - t * t) / (1 / x1 + 2 * t / std::sqrt(x1 * x2) + 1 / x2);
    CHECK(*predict_copula(m, CopulaSpec::gaussian(t)).xi_R == doctest::Approx(g).epsilon(1e-12));
  }
}

TEST_CASE("documented copula values") {
  const auto il = predict_copula(mp(1, 0, 1, 0), CopulaSpec::inverted_logistic(0.5));
  CHECK(*il.sigma_R == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  const auto g = predict_copula(mp(1, -0.25, 1, -0.25), CopulaSpec::gaussian(0.5));
  CHECK(*g.xi_R == doctest::Approx(-0.1875).epsilon(1e-14));
  const auto gz = predict_copula(mp(1, 0, 1, 0), CopulaSpec::gaussian(0.5));
  CHECK(*gz.sigma_R == doctest::Approx(1.5).epsilon(1e-9));
  for (const auto& spec : {CopulaSpec::independence(), CopulaSpec::logistic(0.5), CopulaSpec::gaussian(0.5),
                           CopulaSpec::perfect_negative(), CopulaSpec::inverted_logistic(0.2)}) {
    const auto h = predict_copula(mp(1, 0.3, 1, -0.2), spec);
    CHECK(h.regime == TailRegime::Heavy);
    CHECK(*h.xi_R == 0.3);
  }
}

TEST_CASE("degenerate parameters fall back to independence") {
  const auto a = predict_copula(mp(1, 0, 2, 0), CopulaSpec::gaussian(0.0));
  CHECK(*a.sigma_R == 2.0);
  const auto b = predict_copula(mp(1, 0, 2, 0), CopulaSpec::inverted_logistic(1.0));
  CHECK(*b.sigma_R == 2.0);
  // And the closed forms agree at the boundary.
  CHECK(oracle::gaussian_sigma_R_closed(0.0, 1, 2) == doctest::Approx(2.0));
}

TEST_CASE("route consistency where both routes apply") {
  auto same = [](const TailForm& a, const TailForm& b) {
    CHECK(a.regime == b.regime);
    CHECK(a.parameter() == doctest::Approx(b.parameter()).epsilon(1e-9));
    if (a.regime == TailRegime::Bounded) CHECK(a.r_F == doctest::Approx(b.r_F).epsilon(1e-12));
  };
  for (double s2 : {1.0, 2.0}) {
    const auto z = mp(1, 0, s2, 0);
    const auto n = mp(1, -0.2, s2, -0.4);
    for (double gamma : {0.3, 0.5, 0.9}) {
      same(predict_copula(z, CopulaSpec::logistic(gamma)), predict_theorem(z, lt(1.0, LtCondition::Cond3a)));
      same(predict_copula(n, CopulaSpec::logistic(gamma)), predict_theorem(n, lt(1.0, LtCondition::Cond3b)));
    }
    same(predict_copula(n, CopulaSpec::independence()), predict_theorem(n, lt(0.5, LtCondition::Cond2, 0.0)));
    same(predict_copula(n, CopulaSpec::perfect_positive()), predict_theorem(n, lt(1.0, LtCondition::Cond3b)));
  }
  // Case (iii): predict_copula delegates, so both routes must coincide.
  for (const auto& spec : {CopulaSpec::logistic(0.5), CopulaSpec::inverted_logistic(0.5), CopulaSpec::gaussian(0.5),
                           CopulaSpec::independence(), CopulaSpec::perfect_positive()}) {
    for (const auto& m : {mp(1, 0.5, 2, 0.5), mp(1, -0.3, 2, -0.3), mp(1, 0.2, 1, -0.4), mp(2, 0, 1, -0.4)}) {
      same(predict_copula(m, spec), predict_theorem(m, lt_descriptor_for(spec)));
    }
  }
}

TEST_CASE("limiting coherence of the copula rows") {
  for (double rho : {0.1, 0.3, 0.5, 0.9}) {
    for (double xi : {-0.1, -0.25, -1.0}) {
      const double inv = 1 / xi + 2 * rho / std::sqrt(xi * xi) + 1 / xi;
      CHECK((1 - rho * rho) / inv == doctest::Approx(0.5 * (1 + rho) * xi).epsilon(1e-12));
    }
    for (double s : {1.0, 2.0}) {
      CHECK(gaussian_sigma_R(rho, s, s) == doctest::Approx(2 * 0.5 * (1 + rho) * s).epsilon(1e-6));
    }
  }
  for (double gamma : {0.3, 0.5, 0.9}) {
    for (double s : {1.0, 2.0}) {
      CHECK(inverted_logistic_sigma_R(gamma, s, s) == doctest::Approx(2 * std::pow(2.0, -gamma) * s).epsilon(1e-6));
    }
  }
  // Gaussian with rho = 0 is the independence value max(sigma1, sigma2).
  CHECK(gaussian_sigma_R(1e-12, 1.0, 3.0) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("condition 2 with kappa = 0 equals the independence-style harmonic form") {
  for (double eta : {0.5, 0.7, 1.0}) {
    const auto f = predict_theorem(mp(1, -0.3, 1, -0.6), lt(eta, LtCondition::Cond2, 0.0));
    CHECK(*f.xi_R == doctest::Approx(2 * eta / (1 / -0.3 + 1 / -0.6)).epsilon(1e-15));
  }
}

TEST_CASE("bounded predictions have additive endpoints") {
  for (const auto& spec : {CopulaSpec::logistic(0.5), CopulaSpec::inverted_logistic(0.5), CopulaSpec::gaussian(0.5),
                           CopulaSpec::independence(), CopulaSpec::perfect_positive()}) {
    for (const auto& m : {mp(1, -0.3, 2, -0.3), mp(1, -0.2, 3, -0.7)}) {
      const auto f = predict_copula(m, spec);
      REQUIRE(f.regime == TailRegime::Bounded);
      CHECK(f.r_F == doctest::Approx(m.m1.upper_endpoint() + m.m2.upper_endpoint()).epsilon(1e-14));
      CHECK(*f.xi_R < 0.0);
    }
  }
}

TEST_CASE("regime invariants") {
  for (const auto& spec : {CopulaSpec::logistic(0.3), CopulaSpec::inverted_logistic(0.7), CopulaSpec::gaussian(0.2),
                           CopulaSpec::independence(), CopulaSpec::perfect_positive()}) {
    for (const auto& m : {mp(1, 0.5, 1, 0.5), mp(1, 0, 2, 0), mp(1, -0.5, 1, -0.5), mp(1, -0.2, 1, -0.4),
                          mp(1, 0.1, 1, 0), mp(1, 0, 1, -0.4)}) {
      const auto f = predict_copula(m, spec);
      switch (f.regime) {
        case TailRegime::Heavy:
          CHECK(*f.xi_R > 0);
          CHECK(std::isinf(f.r_F));
          break;
        case TailRegime::Bounded:
          CHECK(*f.xi_R < 0);
          CHECK(std::isfinite(f.r_F));
          break;
        case TailRegime::Exponential:
          CHECK(f.sigma_R.has_value());
          CHECK(std::isinf(f.r_F));
          break;
      }
      CHECK(f.c_bounds.has_value() == (f.prefactor_class == PrefactorClass::IntervalConstant));
      CHECK_FALSE(f.basis.empty());
    }
  }
}

TEST_CASE("GPD equivalent above a threshold") {
  TailForm h;
  h.regime = TailRegime::Heavy;
  h.xi_R = 0.5;
  CHECK(gpd_equivalent(h, 2.0) == GpdParams(1.0, 0.5));
  CHECK_THROWS_AS(gpd_equivalent(h, 0.0), InvalidArgument);

  TailForm b;
  b.regime = TailRegime::Bounded;
  b.xi_R = -0.15;
  b.r_F = 10.0;
  const auto g = gpd_equivalent(b, 6.0);
  CHECK(g.sigma == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(g.xi == -0.15);
  CHECK_THROWS_AS(gpd_equivalent(b, 10.0), InvalidArgument);

  TailForm e;
  e.regime = TailRegime::Exponential;
  e.sigma_R = 3.0;
  CHECK(gpd_equivalent(e, 17.0) == GpdParams(3.0, 0.0));
}

TEST_CASE("GPD equivalent commutes with threshold stability") {
  TailForm b;
  b.regime = TailRegime::Bounded;
  b.xi_R = -0.15;
  b.r_F = 10.0;
  TailForm h;
  h.regime = TailRegime::Heavy;
  h.xi_R = 0.4;
  TailForm e;
  e.regime = TailRegime::Exponential;
  e.sigma_R = 2.0;
  for (const auto& f : {b, h, e}) {
    for (double u : {1.0, 3.0}) {
      for (double du : {0.5, 4.0}) {
        const auto direct = gpd_equivalent(f, u + du);
        const auto chained = threshold_stability(gpd_equivalent(f, u), du);
        CHECK(chained.sigma == doctest::Approx(direct.sigma).epsilon(1e-14));
        CHECK(chained.xi == direct.xi);
      }
    }
  }
}

TEST_CASE("GPD equivalent reproduces the survivor ratio of the tail form") {
  // Bounded: Pr{R > u + y | R > u} = (1 - y/(r_F - u))^{-1/xi_R}.
  const double xi = -0.15, r_F = 10.0, u = 6.0;
  TailForm b;
  b.regime = TailRegime::Bounded;
  b.xi_R = xi;
  b.r_F = r_F;
  const auto g = gpd_equivalent(b, u);
  for (double y : {0.5, 1.0, 3.0}) {
    const double ratio = std::pow((r_F - u - y) / (r_F - u), -1.0 / xi);
    CHECK(gpd_survival(g, y) == doctest::Approx(ratio).epsilon(1e-12));
  }
}
