#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "cylou/bernstein.hpp"
#include "cylou/exponent.hpp"
#include "oracles.hpp"

using namespace cylou;
using Catch::Approx;

namespace {
std::vector<BernsteinSpec> catalogue() {
    return {BernsteinSpec::stable(0.5, 1.0),
            BernsteinSpec::stable(0.25, 2.0),
            BernsteinSpec::stable(1.0, 0.7),
            BernsteinSpec::relativistic(0.5, 2.0),
            BernsteinSpec::relativistic(0.8, 0.3),
            BernsteinSpec::logarithmic(1.0),
            BernsteinSpec::logarithmic(3.5),
            BernsteinSpec::scaled(BernsteinSpec::stable(0.5, 1.0), 2.0),
            BernsteinSpec::time_scaled(BernsteinSpec::logarithmic(1.0), 3.0),
            BernsteinSpec::sum({BernsteinSpec::stable(0.5, 1.0), BernsteinSpec::logarithmic(1.0)})};
}
}  // namespace

TEST_CASE("catalogue evaluation", "[bernstein]") {
    CHECK(BernsteinSpec::stable(0.5, 1.0)(4.0) == Approx(2.0));
    CHECK(BernsteinSpec::logarithmic(1.0)(std::numbers::e - 1.0) == Approx(1.0));
    for (const auto& f : catalogue()) CHECK(f(0.0) == 0.0);
    // relativistic normalization: f(0) = 0, slope-a power growth at infinity
    const auto rel = BernsteinSpec::relativistic(0.5, 2.0);
    CHECK(rel(1e12) == Approx(std::sqrt(1e12)).epsilon(1e-4));
}

TEST_CASE("malformed specs are rejected at construction", "[bernstein]") {
    CHECK_THROWS_AS(BernsteinSpec::stable(1.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinSpec::stable(0.5, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinSpec::stable(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinSpec::relativistic(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinSpec::logarithmic(0.0), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinSpec::sum({}), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinSpec::scaled(BernsteinSpec::logarithmic(1.0), 0.0),
                    std::invalid_argument);
}

TEST_CASE("complete monotonicity finite differences", "[bernstein]") {
    const auto grid = uniform_grid(0.1, 10.0, 991);

    for (const auto& f : catalogue()) {
        const auto rep = check_complete_monotonicity([&f](double r) { return f(r); }, grid, 4);
        INFO("kind " << static_cast<int>(f.kind()));
        CHECK(rep.passed());
    }

    SECTION("convex probe fails at order 2") {
        const auto rep =
            check_complete_monotonicity([](double r) { return r * r; }, grid, 4);
        REQUIRE(rep.verdict == MonotonicityReport::Verdict::fail);
        CHECK(rep.order == 2);
    }

    SECTION("sum of catalogue members passes") {
        const auto f = BernsteinSpec::sum(
            {BernsteinSpec::stable(0.5, 1.0), BernsteinSpec::logarithmic(1.0)});
        CHECK(check_complete_monotonicity([&f](double r) { return f(r); }, grid, 4).passed());
    }

    SECTION("grid-scale oscillation is inconclusive, not a failure") {
        const double h = grid[1] - grid[0];
        const double omega = std::numbers::pi / h;  // alternates sign per grid step
        auto noisy = [omega](double r) { return std::sqrt(r) + 1e-8 * std::sin(omega * r); };
        const auto rep = check_complete_monotonicity(noisy, grid, 4);
        CHECK(rep.verdict == MonotonicityReport::Verdict::inconclusive);
    }

    SECTION("wider-range grid, order 4") {
        const auto wide = uniform_grid(1e-2, 1e2, 10001);
        for (const auto& f : catalogue()) {
            CHECK(check_complete_monotonicity([&f](double r) { return f(r); }, wide, 4).passed());
        }
    }
}

TEST_CASE("superlogarithmic growth heuristic", "[bernstein]") {
    CHECK(superlog_growth_check(BernsteinSpec::stable(0.5, 1.0)).verdict ==
          SuperlogReport::Verdict::satisfied);
    CHECK(superlog_growth_check(BernsteinSpec::logarithmic(1.0)).verdict ==
          SuperlogReport::Verdict::violated);
    CHECK(superlog_growth_check(
              BernsteinSpec::sum({BernsteinSpec::logarithmic(1.0), BernsteinSpec::logarithmic(2.0)}))
              .verdict == SuperlogReport::Verdict::violated);
}

TEST_CASE("integrated exponent", "[bernstein]") {
    SECTION("closed form against the quadrature route") {
        // frozen oracle: adaptive quadrature of int_0^t f(e^{-2 gamma s} r) ds
        for (double a : {0.3, 0.5, 0.9, 1.0}) {
            for (double gamma : {0.0, 0.5, 2.0}) {
                for (double t : {0.25, 1.0, 4.0}) {
                    IntegratedExponent F(BernsteinSpec::stable(a, 1.3), gamma, t);
                    for (double r : {0.1, 1.0, 10.0}) {
                        const double via_oracle = oracle::integrate(
                            [&](double s) { return 1.3 * std::pow(std::exp(-2.0 * gamma * s) * r, a); },
                            0.0, t);
                        CHECK(F(r) == Approx(via_oracle).epsilon(1e-8));
                        if (gamma > 0.0)
                            CHECK(F.eval_quadrature(r) == Approx(F(r)).epsilon(1e-8));
                    }
                }
            }
        }
    }

    SECTION("long-horizon stable limit") {
        IntegratedExponent F(BernsteinSpec::stable(0.5, 1.0), 1.0, 50.0);
        CHECK(F(1.0) == Approx(1.0).epsilon(1e-8));  // (1 - e^{-50}) / (2 * 0.5 * 1)
    }

    SECTION("gamma = 0 collapses to t f(r)") {
        IntegratedExponent F(BernsteinSpec::logarithmic(1.0), 0.0, 2.0);
        CHECK(F(std::numbers::e - 1.0) == Approx(2.0));
        CHECK(F(0.0) == 0.0);
    }

    SECTION("F_t is a Bernstein function of r") {
        IntegratedExponent F(BernsteinSpec::logarithmic(1.0), 0.7, 1.5);
        const auto grid = uniform_grid(0.1, 10.0, 991);
        CHECK(check_complete_monotonicity([&F](double r) { return F(r); }, grid, 4).passed());
    }

    SECTION("monotone in t and in r") {
        const auto f = BernsteinSpec::sum(
            {BernsteinSpec::stable(0.5, 1.0), BernsteinSpec::logarithmic(2.0)});
        double prev = 0.0;
        for (double t : {0.5, 1.0, 2.0, 4.0}) {
            IntegratedExponent F(f, 1.0, t);
            const double v = F(3.0);
            CHECK(v >= prev);
            prev = v;
            double prev_r = 0.0;
            for (double r : {0.5, 1.0, 2.0, 4.0}) {
                const double vr = F(r);
                CHECK(vr >= prev_r);
                prev_r = vr;
            }
        }
    }
}

TEST_CASE("exponential-decay integral", "[bernstein]") {
    SECTION("sqrt exponent: closed value 2") {
        auto res = exp_decay_integral([](double r) { return std::sqrt(r); });
        REQUIRE(res.finite());
        CHECK(res.value == Approx(2.0).epsilon(1e-8));
    }

    SECTION("power-law exponent against Gamma(1 + 1/a) c^{-1/a}") {
        // (a, c) = (0.5, 2): Gamma(3) * 2^{-2} = 0.5
        auto res = exp_decay_integral([](double r) { return 2.0 * std::sqrt(r); });
        REQUIRE(res.finite());
        CHECK(res.value == Approx(0.5).epsilon(1e-8));
        const double via_oracle =
            oracle::integrate_to_infinity([](double r) { return std::exp(-2.0 * std::sqrt(r)); }, 0.0);
        CHECK(res.value == Approx(via_oracle).epsilon(1e-8));
    }

    SECTION("logarithmic exponent diverges") {
        auto res = exp_decay_integral([](double r) { return std::log1p(r); });
        CHECK(res.verdict == ExpDecayResult::Verdict::divergent);
    }

    SECTION("decreasing exponent violates the contract") {
        CHECK_THROWS_AS(exp_decay_integral([](double r) { return -r; }), std::invalid_argument);
    }

    SECTION("scaled catalogue closed form") {
        for (double a : {0.25, 0.5, 0.8}) {
            for (double c : {0.5, 1.0, 3.0}) {
                for (double kappa : {0.2, 1.0, 5.0}) {
                    auto res = exp_decay_integral_scaled(BernsteinSpec::stable(a, c), kappa);
                    const double want = std::tgamma(1.0 + 1.0 / a) * std::pow(kappa * c, -1.0 / a);
                    REQUIRE(res.finite());
                    CHECK(res.value == Approx(want).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("spec serialization round trip", "[bernstein]") {
    const auto f = BernsteinSpec::sum(
        {BernsteinSpec::stable(0.5, 1.0),
         BernsteinSpec::scaled(BernsteinSpec::relativistic(0.7, 2.0), 1.5),
         BernsteinSpec::time_scaled(BernsteinSpec::logarithmic(2.0), 0.25)});
    const auto j = f.to_json();
    CHECK(j["kind"] == "sum");
    CHECK(j["terms"][0]["kind"] == "stable");
    CHECK(j["terms"][0]["a"] == 0.5);
    CHECK(j["terms"][0]["c"] == 1.0);
    const auto back = BernsteinSpec::from_json(j);
    for (double r : {0.0, 0.3, 1.7, 42.0}) CHECK(back(r) == Approx(f(r)).margin(1e-15));
    CHECK_THROWS_AS(BernsteinSpec::from_json(nlohmann::json{{"kind", "nonsense"}}),
                    std::invalid_argument);
}
