#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "cylou/exponent.hpp"
#include "cylou/sampling.hpp"
#include "oracles.hpp"

using namespace cylou;
using Catch::Approx;

TEST_CASE("substreams", "[simulate]") {
    SECTION("identical keys reproduce bit-exactly") {
        RngStream a(99, {7, 3, 11});
        RngStream b(99, {7, 3, 11});
        for (int i = 0; i < 4096; ++i) REQUIRE(a.next_u64() == b.next_u64());
    }
    SECTION("distinct keys decorrelate") {
        const size_t m = 20000;
        auto corr = [&](StreamKey k1, StreamKey k2) {
            RngStream a(1234, k1), b(1234, k2);
            double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
            for (size_t i = 0; i < m; ++i) {
                const double x = a.uniform01(), y = b.uniform01();
                sx += x;
                sy += y;
                sxx += x * x;
                syy += y * y;
                sxy += x * y;
            }
            const double n = static_cast<double>(m);
            return (n * sxy - sx * sy) /
                   std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
        };
        CHECK(std::fabs(corr({0, 0, 0}, {0, 0, 1})) < 4.0 / std::sqrt(double(m)));
        CHECK(std::fabs(corr({0, 5, 2}, {1, 5, 2})) < 4.0 / std::sqrt(double(m)));
        CHECK(std::fabs(corr({2, 1, 9}, {2, 2, 9})) < 4.0 / std::sqrt(double(m)));
    }
    SECTION("uniforms stay inside the open interval") {
        RngStream s(5, {0, 0, 0});
        for (int i = 0; i < 100000; ++i) {
            const double u = s.uniform01();
            REQUIRE(u > 0.0);
            REQUIRE(u < 1.0);
        }
    }
}

TEST_CASE("symmetric stable sampler", "[simulate]") {
    SECTION("scale equivariance is an implementation contract") {
        RngStream a(7, {1, 2, 3}), b(7, {1, 2, 3});
        for (int i = 0; i < 100; ++i) {
            const double x1 = sample_sym_stable(0.8, 1.0, a);
            const double x2 = sample_sym_stable(0.8, 2.5, b);
            REQUIRE(x2 == Approx(2.5 * x1).margin(0.0));
        }
    }
    SECTION("Cauchy quartiles at +-1") {
        RngStream s(11, {0, 0, 0});
        const size_t m = 200000;
        std::vector<double> abs_draws(m);
        for (auto& v : abs_draws) v = std::fabs(sample_sym_stable(1.0, 1.0, s));
        std::nth_element(abs_draws.begin(), abs_draws.begin() + m / 2, abs_draws.end());
        CHECK(abs_draws[m / 2] == Approx(1.0).margin(0.02));
    }
    SECTION("near-Gaussian regime variance calibrates to 2 sigma^2") {
        RngStream s(13, {0, 0, 0});
        const size_t m = 100000;
        double ss = 0.0;
        for (size_t i = 0; i < m; ++i) {
            const double x = sample_sym_stable(1.97, 1.0, s);
            ss += x * x;
        }
        // alpha just below 2: the empirical second moment sits near the
        // Gaussian-limit value 2 (wide band: the tail is still heavy)
        CHECK(ss / double(m) > 1.5);
        CHECK(ss / double(m) < 3.5);
    }
    SECTION("law check via the empirical characteristic function") {
        for (double alpha : {0.7, 1.0, 1.5}) {
            RngStream s(17, {static_cast<uint64_t>(alpha * 100), 0, 0});
            const size_t m = 100000;
            std::vector<double> xs(m);
            for (auto& x : xs) x = sample_sym_stable(alpha, 1.0, s);
            const std::vector<double> hs = {0.1, 0.25, 0.5, 1.0, 2.0, 4.0};
            const auto cf = empirical_cf(xs, hs);
            for (size_t i = 0; i < hs.size(); ++i) {
                const double want = std::exp(-std::pow(std::fabs(hs[i]), alpha));
                CHECK(std::abs(cf.values[i] - std::complex<double>(want, 0.0)) <=
                      cf.half_width);
            }
        }
    }
}

TEST_CASE("positive stable subordinator draws", "[simulate]") {
    // Laplace transform check: mean of e^{-r S} over draws vs e^{-r^a}
    RngStream s(23, {0, 0, 0});
    const size_t m = 100000;
    const double a = 0.6;
    std::vector<double> draws(m);
    for (auto& v : draws) v = sample_positive_stable(a, s);
    for (double r : {0.5, 1.0, 2.0}) {
        double acc = 0.0;
        for (double v : draws) acc += std::exp(-r * v);
        acc /= double(m);
        CHECK(acc == Approx(std::exp(-std::pow(r, a))).margin(3.0 / std::sqrt(double(m))));
    }
}

TEST_CASE("exact convolution draws", "[simulate]") {
    SECTION("scale formulas") {
        CHECK(ou_stable_scale(1.0, 1.0, std::log(2.0)) == Approx(0.5).epsilon(1e-12));
        CHECK(ou_stable_scale(1.0, 1.0, 60.0) == Approx(1.0).epsilon(1e-10));
        CHECK(ou_stable_scale(1.0, 0.0, 1.0) == Approx(1.0));
        // oracle: quadrature of the exponent integral at alpha = 0.7
        const double alpha = 0.7, gamma = 0.5, t = 2.0;
        const double via_oracle = oracle::integrate(
            [&](double s) { return std::exp(-alpha * gamma * s); }, 0.0, t);
        CHECK(std::pow(ou_stable_scale(alpha, gamma, t), alpha) ==
              Approx(via_oracle).epsilon(1e-10));
    }
    SECTION("law vs the convolution symbol") {
        const double alpha = 1.5, gamma = 2.0, t = 0.5;
        const size_t m = 100000;
        std::vector<double> xs(m);
        for (size_t r = 0; r < m; ++r) {
            RngStream st(31, {4, 0, r});
            xs[r] = sample_ou_stable_convolution(alpha, gamma, t, st);
        }
        const std::vector<double> hs = {0.25, 0.5, 1.0, 2.0};
        const auto cf = empirical_cf(xs, hs);
        const double window = (1.0 - std::exp(-alpha * gamma * t)) / (alpha * gamma);
        for (size_t i = 0; i < hs.size(); ++i) {
            const double want = std::exp(-std::pow(hs[i], alpha) * window);
            CHECK(std::abs(cf.values[i] - std::complex<double>(want, 0.0)) <= cf.half_width);
        }
    }
}

TEST_CASE("generic subordinate-Brownian convolution", "[simulate]") {
    SECTION("stable catalogue member cross-validates against the exponent") {
        const auto f = BernsteinSpec::stable(0.5, 1.0);
        IntegratedExponent F(f, 1.0, 1.0);
        const size_t m = 20000;
        std::vector<double> xs(m);
        for (size_t r = 0; r < m; ++r) {
            RngStream st(37, {5, 0, r});
            xs[r] = sample_convolution_generic(f, 1.0, 1.0, 512, st);
        }
        const std::vector<double> hs = {0.5, 1.0, 2.0};
        const auto cf = empirical_cf(xs, hs);
        for (size_t i = 0; i < hs.size(); ++i) {
            const double want = std::exp(-F(hs[i] * hs[i]));
            CHECK(std::abs(cf.values[i] - std::complex<double>(want, 0.0)) <=
                  cf.half_width + 5e-3);  // discretization bias allowance
        }
    }
    SECTION("gamma subordinator route (logarithmic exponent), gamma = 0") {
        const auto f = BernsteinSpec::logarithmic(1.0);
        const size_t m = 20000;
        std::vector<double> xs(m);
        for (size_t r = 0; r < m; ++r) {
            RngStream st(41, {6, 0, r});
            xs[r] = sample_convolution_generic(f, 0.0, 1.0, 128, st);
        }
        const std::vector<double> hs = {0.5, 1.0, 2.0};
        const auto cf = empirical_cf(xs, hs);
        for (size_t i = 0; i < hs.size(); ++i) {
            const double want = std::exp(-f(hs[i] * hs[i]));
            CHECK(std::abs(cf.values[i] - std::complex<double>(want, 0.0)) <=
                  cf.half_width + 5e-3);
        }
    }
    SECTION("relativistic member via the compound-Poisson approximation") {
        const auto f = BernsteinSpec::relativistic(0.5, 1.0);
        const size_t m = 20000;
        std::vector<double> xs(m);
        for (size_t r = 0; r < m; ++r) {
            RngStream st(43, {7, 0, r});
            xs[r] = sample_convolution_generic(f, 0.0, 1.0, 64, st);
        }
        const std::vector<double> hs = {0.5, 1.0};
        const auto cf = empirical_cf(xs, hs);
        for (size_t i = 0; i < hs.size(); ++i) {
            const double want = std::exp(-f(hs[i] * hs[i]));
            CHECK(std::abs(cf.values[i] - std::complex<double>(want, 0.0)) <=
                  cf.half_width + 1e-2);
        }
    }
    SECTION("small horizons shrink the draws") {
        const auto f = BernsteinSpec::stable(0.5, 1.0);
        double big = 0.0, small = 0.0;
        const size_t m = 2000;
        for (size_t r = 0; r < m; ++r) {
            RngStream s1(47, {8, 0, r}), s2(47, {9, 0, r});
            big += std::min(std::fabs(sample_convolution_generic(f, 0.0, 4.0, 64, s1)), 50.0);
            small += std::min(std::fabs(sample_convolution_generic(f, 0.0, 0.01, 64, s2)), 50.0);
        }
        CHECK(small < 0.2 * big);
    }
}

TEST_CASE("field states and the Markov step", "[simulate]") {
    const auto spectrum = SpectrumSpec::heat_equation(1, 1.0, 0.0, 1.0);
    const auto modes = spectrum.enumerate(16);

    SECTION("reproducibility of whole trajectories") {
        auto fs0 = make_field({{1, 1.0}}, spectrum, 16);
        auto a = step_field(fs0, 0.5, modes, 2024, 1, 0, 0);
        auto b = step_field(fs0, 0.5, modes, 2024, 1, 0, 0);
        REQUIRE(a.coefficients == b.coefficients);
        auto a2 = step_field(a, 0.5, modes, 2024, 1, 0, 1);
        auto b2 = step_field(b, 0.5, modes, 2024, 1, 0, 1);
        REQUIRE(a2.coefficients == b2.coefficients);
        CHECK(a2.t == Approx(1.0));
    }

    SECTION("near-zero intensity reduces to the pure contraction") {
        const auto quiet = SpectrumSpec::heat_equation(1, 1.0, 0.0, 1e-12);
        const auto qmodes = quiet.enumerate(4);
        auto fs = make_field({{1, 1.0}, {2, -0.5}}, quiet, 4);
        auto next = step_field(fs, 0.7, qmodes, 5, 1, 0, 0);
        CHECK(next.coefficients[0] == Approx(std::exp(-0.7)).margin(1e-6));
        CHECK(next.coefficients[1] == Approx(-0.5 * std::exp(-4.0 * 0.7)).margin(1e-6));
    }

    SECTION("semigroup property: two half steps match one full step in law") {
        const size_t m = 20000;
        const size_t n_modes = 4;
        auto fs0 = make_field({}, spectrum, n_modes);
        std::vector<double> one_step(m), two_steps(m);
        for (size_t r = 0; r < m; ++r) {
            auto a = step_field(fs0, 1.0, modes, 77, 1, r, 0);
            one_step[r] = a.coefficients[1];
            auto b = step_field(fs0, 0.5, modes, 77, 2, r, 0);
            b = step_field(b, 0.5, modes, 77, 2, r, 1);
            two_steps[r] = b.coefficients[1];
        }
        const std::vector<double> hs = {0.3, 1.0, 3.0};
        const auto cf1 = empirical_cf(one_step, hs);
        const auto cf2 = empirical_cf(two_steps, hs);
        for (size_t i = 0; i < hs.size(); ++i)
            CHECK(std::abs(cf1.values[i] - cf2.values[i]) <= cf1.half_width + cf2.half_width);
    }

    SECTION("long horizons forget the start: stationary mode scale") {
        const size_t m = 40000;
        std::vector<double> xs(m);
        for (size_t r = 0; r < m; ++r) {
            auto fs = make_field({{1, 10.0}}, spectrum, 2);
            auto next = step_field(fs, 40.0, modes, 91, 3, r, 0);
            xs[r] = next.coefficients[0];
        }
        // stationary law of mode 1: Cauchy with scale sigma_z / gamma = pi
        const std::vector<double> hs = {0.25, 0.5, 1.0};
        const auto cf = empirical_cf(xs, hs);
        for (size_t i = 0; i < hs.size(); ++i) {
            const double want = std::exp(-std::numbers::pi * hs[i]);
            CHECK(std::abs(cf.values[i] - std::complex<double>(want, 0.0)) <= cf.half_width);
        }
    }

    SECTION("tail bound restricted to discarded modes") {
        auto fs = make_field({}, spectrum, 16, 0.5);
        // consistency with a direct evaluation of the same closed forms
        const double direct = tail_alpha_moment_bound(spectrum, 0.5, 16);
        CHECK(fs.tail_norm_bound == Approx(direct));
        CHECK(fs.tail_norm_bound > 0.0);
        // more retained modes -> smaller bound
        auto fs2 = make_field({}, spectrum, 64, 0.5);
        CHECK(fs2.tail_norm_bound < fs.tail_norm_bound);
    }
}

TEST_CASE("empirical characteristic function", "[simulate]") {
    SECTION("constant samples") {
        std::vector<double> xs(2000, 1.7);
        const std::vector<double> hs = {0.5, 2.0};
        const auto cf = empirical_cf(xs, hs);
        for (size_t i = 0; i < hs.size(); ++i) {
            CHECK(cf.values[i].real() == Approx(std::cos(hs[i] * 1.7)).margin(1e-12));
            CHECK(cf.values[i].imag() == Approx(std::sin(hs[i] * 1.7)).margin(1e-12));
        }
    }
    SECTION("symmetric samples have vanishing imaginary part") {
        RngStream s(53, {0, 0, 0});
        const size_t m = 50000;
        std::vector<double> xs(m);
        for (auto& x : xs) x = sample_sym_stable(1.2, 1.0, s);
        const std::vector<double> hs = {0.5, 1.0, 2.0};
        const auto cf = empirical_cf(xs, hs);
        for (const auto& v : cf.values) CHECK(std::fabs(v.imag()) <= cf.half_width);
    }
    SECTION("too few samples rejected") {
        std::vector<double> xs(10, 0.0);
        const std::vector<double> hs = {1.0};
        CHECK_THROWS_AS(empirical_cf(xs, hs), std::invalid_argument);
    }
}
