#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "cylou/criteria.hpp"
#include "oracles.hpp"

using namespace cylou;
using Catch::Approx;

TEST_CASE("mode enumeration", "[criteria]") {
    SECTION("d = 1") {
        const auto m = enumerate_modes(1, 3);
        REQUIRE(m.size() == 3);
        CHECK(m[0].first == std::vector<int>{1});
        CHECK(m[0].second == 1.0);
        CHECK(m[1].second == 4.0);
        CHECK(m[2].second == 9.0);
    }
    SECTION("d = 2 ties break lexicographically") {
        const auto m = enumerate_modes(2, 3);
        REQUIRE(m.size() == 3);
        CHECK(m[0].first == std::vector<int>{1, 1});
        CHECK(m[0].second == 2.0);
        CHECK(m[1].first == std::vector<int>{1, 2});
        CHECK(m[1].second == 5.0);
        CHECK(m[2].first == std::vector<int>{2, 1});
        CHECK(m[2].second == 5.0);
    }
    SECTION("prefix property: first N modes are the N smallest keys") {
        const auto big = enumerate_modes(2, 200);
        const auto small = enumerate_modes(2, 50);
        for (size_t i = 0; i < small.size(); ++i) {
            CHECK(small[i].first == big[i].first);
        }
        // brute-force check of sortedness
        for (size_t i = 1; i < big.size(); ++i) {
            const bool ordered = big[i - 1].second < big[i].second ||
                                 (big[i - 1].second == big[i].second &&
                                  big[i - 1].first < big[i].first);
            CHECK(ordered);
        }
    }
    SECTION("gamma is the squared lattice norm") {
        const auto m = enumerate_modes(2, 10);
        for (const auto& [n, g] : m) {
            long ss = 0;
            for (int v : n) ss += static_cast<long>(v) * v;
            CHECK(g == static_cast<double>(ss));
        }
    }
}

TEST_CASE("noise membership criterion", "[criteria]") {
    SECTION("heat d=1 beta=0: the noise itself is not in H") {
        const auto rep = levy_in_H_criterion(SpectrumSpec::heat_equation(1, 1.0, 0.0, 1.0), 4000);
        CHECK(rep.verdict == SeriesVerdict::divergent);
        // constant per-mode terms 2K/(2-a) + 2K/a = 4
        CHECK(rep.terms[0] == Approx(4.0));
        CHECK(rep.terms[100] == Approx(4.0));
    }
    SECTION("summable intensities give a finite value") {
        std::vector<SpectrumSpec::ExplicitMode> modes;
        for (int n = 1; n <= 40; ++n)
            modes.push_back({static_cast<double>(n),
                             LevyMeasureSpec::stable_sym(1.0, std::pow(2.0, -n)), std::nullopt});
        const auto rep = levy_in_H_criterion(SpectrumSpec::explicit_modes(std::move(modes)), 100);
        REQUIRE(rep.verdict == SeriesVerdict::finite);
        CHECK(rep.value() == Approx(4.0).epsilon(1e-9));
    }
    SECTION("empty prefix has partial sum zero") {
        const auto rep = levy_in_H_criterion(SpectrumSpec::heat_equation(1, 1.0, 0.0, 1.0), 0);
        CHECK(rep.partial_sums.empty());
        CHECK(rep.modes_used == 0);
    }
}

TEST_CASE("state-space criterion", "[criteria]") {
    SECTION("heat d=1 converges, d=3 diverges") {
        CHECK(state_space_criterion(SpectrumSpec::heat_equation(1, 1.0, 0.0, 1.0), 10000).verdict ==
              SeriesVerdict::finite);
        CHECK(state_space_criterion(SpectrumSpec::heat_equation(3, 1.0, 0.0, 1.0), 10000).verdict ==
              SeriesVerdict::divergent);
    }

    SECTION("per-mode closed form against the s-quadrature oracle") {
        // term = int_0^1 [e^{-2 g s} M2(e^{g s}) + tail(e^{g s})] ds
        for (double alpha : {0.5, 1.0, 1.5}) {
            for (double gamma : {1.0, 4.0}) {
                std::vector<SpectrumSpec::ExplicitMode> modes;
                modes.push_back({gamma, LevyMeasureSpec::stable_sym(alpha, 1.0), std::nullopt});
                const auto rep =
                    state_space_criterion(SpectrumSpec::explicit_modes(std::move(modes)), 10);
                const double via_oracle = oracle::integrate(
                    [&](double s) {
                        const double radius = std::exp(gamma * s);
                        const double m2 = 2.0 * std::pow(radius, 2.0 - alpha) / (2.0 - alpha);
                        const double tail = 2.0 * std::pow(radius, -alpha) / alpha;
                        return std::exp(-2.0 * gamma * s) * m2 + tail;
                    },
                    0.0, 1.0);
                REQUIRE(rep.verdict == SeriesVerdict::finite);
                CHECK(rep.value() == Approx(via_oracle).epsilon(1e-8));
            }
        }
    }

    SECTION("generic-measure route agrees with the stable closed form") {
        // bernstein_lower(stable(0.5, 1)) is the unit Cauchy measure
        std::vector<SpectrumSpec::ExplicitMode> ms;
        ms.push_back({2.0, LevyMeasureSpec::bernstein_lower(BernsteinSpec::stable(0.5, 1.0)),
                      std::nullopt});
        std::vector<SpectrumSpec::ExplicitMode> mstable;
        mstable.push_back({2.0, LevyMeasureSpec::stable_sym(1.0, 1.0), std::nullopt});
        const auto via_generic =
            state_space_criterion(SpectrumSpec::explicit_modes(std::move(ms)), 10);
        const auto via_closed =
            state_space_criterion(SpectrumSpec::explicit_modes(std::move(mstable)), 10);
        CHECK(via_generic.value() == Approx(via_closed.value()).epsilon(1e-7));
    }

    SECTION("partial sums are nondecreasing") {
        const auto rep = state_space_criterion(SpectrumSpec::heat_equation(2, 1.0, 0.0, 1.0), 3000);
        for (size_t i = 1; i < rep.partial_sums.size(); ++i)
            CHECK(rep.partial_sums[i] >= rep.partial_sums[i - 1]);
    }

    SECTION("verdicts are invariant under intensity scaling") {
        for (double lambda : {0.5, 2.0}) {
            const auto base = state_space_criterion(SpectrumSpec::heat_equation(1, 1.0, 0.0, 1.0), 2000);
            const auto scaled =
                state_space_criterion(SpectrumSpec::heat_equation(1, 1.0, 0.0, lambda), 2000);
            CHECK(scaled.verdict == base.verdict);
            CHECK(scaled.partial_sums.back() ==
                  Approx(lambda * base.partial_sums.back()).epsilon(1e-12));
        }
    }
}

TEST_CASE("ergodicity moment criteria", "[criteria]") {
    SECTION("heat d=1 both finite") {
        const auto erg = ergodicity_criterion(SpectrumSpec::heat_equation(1, 1.0, 0.0, 1.0), 0.5, 10000);
        CHECK(erg.s2.verdict == SeriesVerdict::finite);
        CHECK(erg.s_alpha.verdict == SeriesVerdict::finite);
        // per-mode closed forms: S2 term 2/gamma, S_alpha term 4/gamma
        CHECK(erg.s2.terms[0] == Approx(2.0));
        CHECK(erg.s_alpha.terms[0] == Approx(4.0));
        // oracle: direct summation of 2/n^2 and 4/n^2 with zeta(2) tail
        const double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;
        CHECK(erg.s2.value() == Approx(2.0 * zeta2).epsilon(1e-3));
        CHECK(erg.s_alpha.value() == Approx(4.0 * zeta2).epsilon(1e-3));
    }
    SECTION("heat d=2 beta=1 diverges") {
        const auto erg = ergodicity_criterion(SpectrumSpec::heat_equation(2, 1.0, 1.0, 1.0), 0.5, 10000);
        CHECK(erg.s2.verdict == SeriesVerdict::divergent);
        CHECK(erg.s_alpha.verdict == SeriesVerdict::divergent);
    }
    SECTION("alpha_m at the stable index diverges mode-wise") {
        const auto erg = ergodicity_criterion(SpectrumSpec::heat_equation(1, 1.0, 0.0, 1.0), 1.0, 100);
        CHECK(erg.s_alpha.verdict == SeriesVerdict::divergent);
        REQUIRE(erg.s_alpha.offending_mode.has_value());
        CHECK(*erg.s_alpha.offending_mode == 1);
    }
    SECTION("generic-measure s-integral against the closed form") {
        std::vector<SpectrumSpec::ExplicitMode> ms;
        ms.push_back({3.0, LevyMeasureSpec::bernstein_lower(BernsteinSpec::stable(0.5, 1.0)),
                      std::nullopt});
        const auto erg_g =
            ergodicity_criterion(SpectrumSpec::explicit_modes(std::move(ms)), 0.5, 10);
        std::vector<SpectrumSpec::ExplicitMode> mstable;
        mstable.push_back({3.0, LevyMeasureSpec::stable_sym(1.0, 1.0), std::nullopt});
        const auto erg_s =
            ergodicity_criterion(SpectrumSpec::explicit_modes(std::move(mstable)), 0.5, 10);
        CHECK(erg_g.s2.value() == Approx(erg_s.s2.value()).epsilon(1e-6));
        CHECK(erg_g.s_alpha.value() == Approx(erg_s.s_alpha.value()).epsilon(1e-6));
    }
}

TEST_CASE("heat-equation threshold", "[criteria]") {
    CHECK(heat_equation_threshold(1, 1.0, 0.0).met);
    CHECK(heat_equation_threshold(1, 1.0, 0.0).margin == Approx(1.0));
    CHECK_FALSE(heat_equation_threshold(3, 1.0, 0.0).met);
    CHECK(heat_equation_threshold(3, 1.0, -2.0).met);

    SECTION("numeric verdicts match the closed form on a grid") {
        for (int d : {1, 2, 3}) {
            for (double alpha : {0.5, 1.0, 1.5}) {
                for (double beta : {-1.0, 0.0, 1.0}) {
                    const auto thr = heat_equation_threshold(d, alpha, beta);
                    const auto rep = state_space_criterion(
                        SpectrumSpec::heat_equation(d, alpha, beta, 1.0), 10000, 0.5);
                    if (rep.verdict == SeriesVerdict::inconclusive) continue;
                    CHECK((rep.verdict == SeriesVerdict::finite) == thr.met);
                }
            }
        }
    }
}

TEST_CASE("criterion report output", "[criteria]") {
    const auto rep = state_space_criterion(SpectrumSpec::heat_equation(1, 1.0, 0.0, 1.0), 500);
    const auto j = rep.to_json();
    CHECK(j["verdict"] == "finite");
    CHECK(j.contains("value"));
    const std::string path = "criterion_test_tmp.csv";
    rep.write_csv(path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line.find("verdict=finite") != std::string::npos);
    std::getline(in, line);
    CHECK(line == "mode_index,gamma,term,partial_sum");
    std::remove(path.c_str());
}
