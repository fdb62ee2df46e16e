#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "doctest.h"
#include "qpcs/distributions.hpp"
#include "qpcs/errors.hpp"

using namespace qpcs;

namespace {

// Independent route to E|X|^p: integrate the density numerically.
double quad_abs_moment(double (*density)(double, double), double param, double p) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double x) {
    const double v = std::pow(x, p) * density(x, param);
    return std::isfinite(v) ? v : 0.0;
  };
  return 2.0 * integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

double gaussian_density(double x, double) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double student_density(double x, double d) {
  const double c = std::exp(std::lgamma(0.5 * (d + 1)) - std::lgamma(0.5 * d)) /
                   std::sqrt(d * std::numbers::pi);
  return c * std::pow(1.0 + x * x / d, -0.5 * (d + 1));
}

// Symmetric Weibull: half the Weibull(shape r) density on each side.
double weibull_density(double x, double r) {
  return 0.5 * r * std::pow(x, r - 1) * std::exp(-std::pow(x, r));
}

struct Moments {
  double mean = 0, var = 0, m4 = 0;
};

Moments empirical(const DistributionSpec& d, int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = sample(d, rng);
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  return {s1 / n, s2 / n, s4 / n};
}

}  // namespace

TEST_CASE("sample: rademacher draws are +-1") {
  SplitMix64 rng(3);
  const auto d = DistributionSpec::rademacher().normalized();
  CHECK(d.scale() == 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = sample(d, rng);
    CHECK((x == 1.0 || x == -1.0));
  }
}

TEST_CASE("sample: same seed gives the same value") {
  const auto d = DistributionSpec::gaussian();
  SplitMix64 a(42), b(42);
  CHECK(sample(d, a) == sample(d, b));
}

TEST_CASE("normalization is analytic") {
  const auto t9 = DistributionSpec::student_t(9).normalized();
  CHECK(t9.scale() == doctest::Approx(0.881917103688196863500538584546).epsilon(1e-15));

  for (const auto& d : {DistributionSpec::gaussian(), DistributionSpec::rademacher(),
                        DistributionSpec::student_t(3), DistributionSpec::student_t(9),
                        DistributionSpec::weibull(1.0), DistributionSpec::weibull(1.5),
                        DistributionSpec::weibull(2.0), DistributionSpec::exp_type(0.5),
                        DistributionSpec::exp_type(1.0), DistributionSpec::psi(0.2)}) {
    CAPTURE(d.name());
    const auto n = d.normalized();
    CHECK(n.is_normalized());
    const double second = std::pow(lp_moment(n, 2.0), 2.0);
    CHECK(std::abs(second - 1.0) <= 1e-12);
  }
}

TEST_CASE("construction rejects invalid parameters") {
  CHECK_THROWS_AS(DistributionSpec::student_t(2), ParamError);
  CHECK_THROWS_AS(DistributionSpec::weibull(0.5), ParamError);
  CHECK_THROWS_AS(DistributionSpec::weibull(2.5), ParamError);
  CHECK_THROWS_AS(DistributionSpec::exp_type(0.0), ParamError);
}

TEST_CASE("parse canonical names") {
  CHECK(DistributionSpec::parse("gaussian").family() == Family::Gaussian);
  CHECK(DistributionSpec::parse("rademacher").family() == Family::Rademacher);
  CHECK(DistributionSpec::parse("student_t(9)").degrees_of_freedom() == 9);
  CHECK(DistributionSpec::parse("weibull(1.5)").weibull_shape() == 1.5);
  const auto psi = DistributionSpec::parse("psi(0.2)");
  CHECK(psi.family() == Family::ExpType);
  CHECK(psi.gamma() == doctest::Approx(5.0));
  for (const char* s : {"gaussian", "rademacher", "student_t(9)", "weibull(1.5)", "psi(0.2)"}) {
    CHECK(DistributionSpec::parse(s).name() == s);
  }
  CHECK_THROWS_AS(DistributionSpec::parse("cauchy"), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::parse("student_t"), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::parse("student_t(2)"), ParamError);
}

TEST_CASE("lp_moment closed forms") {
  CHECK(lp_moment(DistributionSpec::gaussian(), 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lp_moment(DistributionSpec::rademacher(), 7.3) == 1.0);
  CHECK(lp_moment(DistributionSpec::gaussian(), 4.0) ==
        doctest::Approx(1.3160740129524924608).epsilon(1e-14));
  CHECK_THROWS_AS(lp_moment(DistributionSpec::student_t(9), 9.0), MomentDiverges);
  CHECK_THROWS_AS(lp_moment(DistributionSpec::student_t(9), 12.0), MomentDiverges);
}

TEST_CASE("lp_moment agrees with quadrature of the density") {
  for (double p : {1.0, 2.0, 3.5, 4.0, 6.0}) {
    CAPTURE(p);
    CHECK(DistributionSpec::gaussian().raw_abs_moment(p) ==
          doctest::Approx(quad_abs_moment(gaussian_density, 0, p)).epsilon(1e-10));
    CHECK(DistributionSpec::student_t(9).raw_abs_moment(p) ==
          doctest::Approx(quad_abs_moment(student_density, 9, p)).epsilon(1e-9));
    for (double r : {1.0, 1.5, 2.0}) {
      CHECK(DistributionSpec::weibull(r).raw_abs_moment(p) ==
            doctest::Approx(quad_abs_moment(weibull_density, r, p)).epsilon(1e-10));
    }
  }
  // E t_9^4 = 3 d^2 / ((d-2)(d-4))
  CHECK(DistributionSpec::student_t(9).raw_abs_moment(4.0) ==
        doctest::Approx(6.94285714285714285714).epsilon(1e-12));
}

TEST_CASE("exp-type with gamma 1/2 is the gaussian law") {
  const auto e = DistributionSpec::exp_type(0.5).normalized();
  const auto g = DistributionSpec::gaussian().normalized();
  for (double p : {2.0, 4.0, 6.0}) {
    CHECK(std::abs(lp_moment(e, p) - lp_moment(g, p)) <= 1e-10);
  }
}

TEST_CASE("lp norms are nondecreasing in p") {
  for (const auto& d : {DistributionSpec::gaussian(), DistributionSpec::student_t(30),
                        DistributionSpec::weibull(1.2), DistributionSpec::psi(0.5)}) {
    double prev = 0.0;
    for (double p = 1.0; p <= 20.0; p += 0.5) {
      const double v = lp_moment(d.normalized(), p);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("samples match the analytic mean and variance within 5 standard errors") {
  constexpr int n = 1'000'000;
  for (const auto& d : {DistributionSpec::gaussian(), DistributionSpec::rademacher(),
                        DistributionSpec::student_t(9), DistributionSpec::weibull(1.0),
                        DistributionSpec::weibull(1.7), DistributionSpec::exp_type(1.0)}) {
    CAPTURE(d.name());
    const auto nd = d.normalized();
    const auto mom = empirical(nd, n, 1234);
    const double m4 = std::pow(lp_moment(nd, 4.0), 4.0);
    CHECK(std::abs(mom.mean) <= 5.0 / std::sqrt(n));
    CHECK(std::abs(mom.var - 1.0) <= 5.0 * std::sqrt((m4 - 1.0) / n));
    // lp_moment(p = 4) against the Monte-Carlo fourth moment; the standard
    // error uses the analytic eighth moment.
    if (d.family() != Family::StudentT) {
      const double m8 = std::pow(lp_moment(nd, 8.0), 8.0);
      CHECK(std::abs(mom.m4 - m4) <= 5.0 * std::sqrt((m8 - m4 * m4) / n));
    }
  }
}

TEST_CASE("check_weak_moment") {
  SUBCASE("rademacher satisfies kappa1 = 1, gamma = 1/2") {
    const auto rep = check_weak_moment(DistributionSpec::rademacher(), 20, 1.0, 0.5);
    CHECK(rep.satisfied);
    CHECK(rep.p_values.front() == 4.0);
    CHECK(rep.p_values.back() == 20.0);
    for (double v : rep.lp_norms) CHECK(v == 1.0);
  }
  SUBCASE("gaussian minimal kappa1") {
    const auto rep = check_weak_moment(DistributionSpec::gaussian(), 20, 1.0, 0.5);
    // max_p (E|g|^p)^{1/p} / sqrt(p) over p = 4..20 is attained at p = 4.
    CHECK(rep.max_ratio == doctest::Approx(0.658037006476246230409).epsilon(1e-13));
    CHECK(rep.satisfied);
    const auto tight = check_weak_moment(DistributionSpec::gaussian(), 20, 0.65, 0.5);
    CHECK_FALSE(tight.satisfied);
  }
  SUBCASE("non-integer order adds k to the grid") {
    const auto rep = check_weak_moment(DistributionSpec::gaussian(), 6.5, 1.0, 0.5);
    CHECK(rep.p_values == std::vector<double>{4, 5, 6, 6.5, 7});
    for (std::size_t i = 1; i < rep.lp_norms.size(); ++i) {
      CHECK(rep.lp_norms[i] >= rep.lp_norms[i - 1]);
    }
  }
  SUBCASE("student t diverges at p = d") {
    CHECK_THROWS_AS(check_weak_moment(DistributionSpec::student_t(9), 20, 1.0, 0.5),
                    MomentDiverges);
  }
}

TEST_CASE("survival functions") {
  const auto g = DistributionSpec::gaussian();
  CHECK(survival(g, 1.0) == doctest::Approx(0.317310507862914102829).epsilon(1e-14));
  // t_d survival against the density integral
  const auto t = DistributionSpec::student_t(5);
  boost::math::quadrature::exp_sinh<double> integrator;
  for (double x : {0.3, 1.0, 2.5}) {
    const double tail =
        2.0 * integrator.integrate([](double u) { return student_density(u, 5); }, x,
                                   std::numeric_limits<double>::infinity());
    CHECK(survival(t, x) == doctest::Approx(tail).epsilon(1e-10));
  }
  // exp-type change of variables: Pro(|g|^{2 gamma} > t) = Pro(|g| > t^{1/(2 gamma)})
  const auto e = DistributionSpec::exp_type(1.5);
  CHECK(survival(e, 2.0) == doctest::Approx(std::erfc(std::pow(2.0, 1.0 / 3.0) / std::sqrt(2.0))));
  CHECK(survival(DistributionSpec::rademacher(), 0.99) == 1.0);
  CHECK(survival(DistributionSpec::rademacher(), 1.0) == 0.0);
}

TEST_CASE("check_super_gaussian") {
  const auto grid = default_tail_grid();
  REQUIRE(grid.size() == 400);
  CHECK(grid.front() == doctest::Approx(1e-3));
  CHECK(grid.back() == doctest::Approx(1e2));

  SUBCASE("gaussian at sigma = 1 has zero margin") {
    const auto rep = check_super_gaussian(DistributionSpec::gaussian(), 1.0, grid);
    CHECK(rep.satisfied_on_grid);
    CHECK(rep.worst_margin == 0.0);
  }
  SUBCASE("gaussian is super-gaussian for every sigma <= 1") {
    for (double sigma : {0.05, 0.25, 0.5, 0.9, 0.999}) {
      CHECK(check_super_gaussian(DistributionSpec::gaussian(), sigma, grid).satisfied_on_grid);
    }
  }
  SUBCASE("rademacher fails at t = 1.5") {
    const auto rep = check_super_gaussian(DistributionSpec::rademacher(), 1.0, {0.5, 1.5, 3.0});
    CHECK_FALSE(rep.satisfied_on_grid);
    CHECK(rep.worst_margin < 0.0);
  }
  SUBCASE("normalized symmetric weibull is super-gaussian with sigma = 1/2") {
    const auto fine = log_grid(0.01, 10.0, 400);
    for (double r : {1.0, 1.25, 1.5, 1.75, 2.0}) {
      CAPTURE(r);
      CHECK(check_super_gaussian(DistributionSpec::weibull(r).normalized(), 0.5, fine)
                .satisfied_on_grid);
    }
  }
  SUBCASE("grid validation") {
    CHECK_THROWS_AS(check_super_gaussian(DistributionSpec::gaussian(), 1.0, {}), ParamError);
    CHECK_THROWS_AS(check_super_gaussian(DistributionSpec::gaussian(), 1.0, {1.0, 0.5}),
                    ParamError);
    CHECK_THROWS_AS(check_super_gaussian(DistributionSpec::gaussian(), 1.5, grid), ParamError);
  }
}
