// Samplers: symmetric stable variates (Chambers-Mallows-Stuck), exact
// stochastic-convolution draws for stable drivers, subordinator paths for the
// Bernstein catalogue, truncated field states with their Markov step, and the
// empirical characteristic function used to validate laws.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cylou/bernstein.hpp"
#include "cylou/criteria.hpp"
#include "cylou/levy_measure.hpp"
#include "cylou/quadrature.hpp"
#include "cylou/rng.hpp"
#include "cylou/spectrum.hpp"

namespace cylou {

/// One draw with characteristic function e^{-sigma^alpha |h|^alpha},
/// alpha in (0,2).  alpha = 1 reduces to sigma * tan(U) (Cauchy).
inline double sample_sym_stable(double alpha, double sigma, RngStream& stream) {
    if (!(alpha > 0.0) || !(alpha < 2.0))
        throw std::invalid_argument("sample_sym_stable: alpha must lie in (0,2)");
    if (!(sigma > 0.0)) throw std::invalid_argument("sample_sym_stable: sigma must be positive");
    const double u = std::numbers::pi * (stream.uniform01() - 0.5);
    if (alpha == 1.0) return sigma * std::tan(u);
    const double w = stream.exponential();
    const double x = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
                     std::pow(std::cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
    return sigma * x;
}

/// One-sided a-stable draw with Laplace transform e^{-r^a}, a in (0,1)
/// (Kanter's representation).
inline double sample_positive_stable(double a, RngStream& stream) {
    if (!(a > 0.0) || !(a < 1.0))
        throw std::invalid_argument("sample_positive_stable: a must lie in (0,1)");
    const double u = std::numbers::pi * stream.uniform01();
    const double w = stream.exponential();
    const double num = std::sin((1.0 - a) * u);
    const double s = std::pow(std::sin(a * u), a / (1.0 - a)) * num /
                     std::pow(std::sin(u), 1.0 / (1.0 - a));
    return std::pow(s / w, (1.0 - a) / a);
}

/// Scale of the stochastic convolution int_0^t e^{-gamma(t-s)} dZ_s for a
/// unit-scale symmetric alpha-stable driver:
/// ((1 - e^{-alpha gamma t}) / (alpha gamma))^{1/alpha}, or t^{1/alpha} at gamma = 0.
inline double ou_stable_scale(double alpha, double gamma, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("ou_stable_scale: t must be positive");
    const double x = alpha * gamma;
    const double window = (x * t < 1e-12) ? t : -std::expm1(-x * t) / x;
    return std::pow(window, 1.0 / alpha);
}

/// Exact-in-law draw of the convolution for a symmetric alpha-stable driver.
inline double sample_ou_stable_convolution(double alpha, double gamma, double t,
                                           RngStream& stream) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("sample_ou_stable_convolution: gamma >= 0");
    return sample_sym_stable(alpha, ou_stable_scale(alpha, gamma, t), stream);
}

// ---------------------------------------------------------------------------
// Subordinator increments for the Bernstein catalogue
// ---------------------------------------------------------------------------

/// Samples increments of the subordinator with Laplace exponent f.  Stable
/// parts are exact (Kanter), logarithmic parts are exact Gamma increments,
/// relativistic parts use a compound-Poisson approximation whose jumps below
/// the cutoff are replaced by their mean.
class SubordinatorSampler {
public:
    explicit SubordinatorSampler(const BernsteinSpec& f, double jump_cutoff = 1e-6) {
        build(f, 1.0, 1.0, jump_cutoff);
    }

    double increment(double dt, RngStream& stream) const {
        double total = 0.0;
        for (const auto& part : parts_) total += part(dt, stream);
        return total;
    }

private:
    using Part = std::function<double(double, RngStream&)>;

    // lambda_arg: accumulated argument dilation f(lambda r); kappa: value scale
    void build(const BernsteinSpec& f, double lambda_arg, double kappa, double cutoff) {
        using Kind = BernsteinSpec::Kind;
        switch (f.kind()) {
            case Kind::stable: {
                const double a = f.param1();
                const double c = kappa * f.param2() * std::pow(lambda_arg, a);
                if (a >= 1.0) {
                    // deterministic subordinator S_t = c t (Laplace exponent c r)
                    parts_.push_back([c](double dt, RngStream&) { return c * dt; });
                } else {
                    parts_.push_back([a, c](double dt, RngStream& st) {
                        return std::pow(c * dt, 1.0 / a) * sample_positive_stable(a, st);
                    });
                }
                return;
            }
            case Kind::logarithmic: {
                // f(lambda r) = log(1 + r/(b/lambda)): Gamma subordinator with
                // rate b/lambda; kappa scales time
                const double rate = f.param1() / lambda_arg;
                parts_.push_back([rate, kappa](double dt, RngStream& st) {
                    return st.gamma(kappa * dt) / rate;
                });
                return;
            }
            case Kind::relativistic: {
                build_tempered(f.param1(), f.param2(), lambda_arg, kappa, cutoff);
                return;
            }
            case Kind::scaled:
                build(f.children()[0], lambda_arg * f.param1(), kappa, cutoff);
                return;
            case Kind::time_scaled:
                build(f.children()[0], lambda_arg, kappa * f.param1(), cutoff);
                return;
            case Kind::sum:
                for (const auto& term : f.children()) build(term, lambda_arg, kappa, cutoff);
                return;
        }
        throw std::invalid_argument("SubordinatorSampler: unsupported Bernstein function");
    }

    // f(r) = (r + m^{1/a})^a - m, Levy density (a/Gamma(1-a)) s^{-1-a} e^{-theta s},
    // theta = m^{1/a}.  Argument dilation scales jumps by lambda; kappa scales
    // the intensity.
    void build_tempered(double a, double m, double lambda_arg, double kappa, double cutoff) {
        const double theta = std::pow(m, 1.0 / a);
        const double amp = kappa * a / std::tgamma(1.0 - a);
        // jump sizes live in "inner" units; dilation multiplies sampled jumps
        auto density = [a, theta, amp](double s) {
            return amp * std::pow(s, -1.0 - a) * std::exp(-theta * s);
        };
        // mean of discarded small jumps and intensity of the kept ones
        AdaptiveOptions opt;
        opt.rel_tol = 1e-10;
        const double drift =
            integrate_adaptive([&](double s) { return s * density(s); }, 0.0, cutoff, opt).value;
        // int_cutoff^infty density: doubling segments
        double intensity = 0.0;
        {
            double abound = cutoff;
            for (int k = 0; k < 200; ++k) {
                const double b = 2.0 * abound;
                const double seg = integrate_adaptive(density, abound, b, opt).value;
                intensity += seg;
                if (seg < 1e-14 * intensity) break;
                abound = b;
            }
        }
        // tabulated inverse of the normalized tail for jump sampling
        const int table_n = 2048;
        std::vector<double> jump_at_quantile(table_n + 1);
        {
            // tail(s) from cutoff upward on a geometric grid
            const double s_max = cutoff * std::pow(2.0, 60);
            std::vector<double> s_grid = geometric_grid(cutoff, s_max, 1024);
            std::vector<double> tail(s_grid.size(), 0.0);
            for (size_t i = s_grid.size() - 1; i-- > 0;) {
                tail[i] = tail[i + 1] +
                          integrate_adaptive(density, s_grid[i], s_grid[i + 1], opt).value;
            }
            const double norm = tail[0];
            for (int q = 0; q <= table_n; ++q) {
                const double target = norm * (1.0 - static_cast<double>(q) / table_n);
                size_t lo = 0, hi = s_grid.size() - 1;
                while (lo + 1 < hi) {
                    const size_t mid = (lo + hi) / 2;
                    (tail[mid] > target ? lo : hi) = mid;
                }
                const double t0 = tail[lo], t1 = tail[hi];
                const double w = (t0 > t1) ? (t0 - target) / (t0 - t1) : 0.0;
                jump_at_quantile[q] =
                    s_grid[lo] * std::pow(s_grid[hi] / s_grid[lo], std::min(1.0, std::max(0.0, w)));
            }
        }
        parts_.push_back([lambda_arg, drift, intensity, jump_at_quantile, table_n](
                             double dt, RngStream& st) {
            double total = drift * dt;
            const uint64_t n_jumps = st.poisson(intensity * dt);
            for (uint64_t j = 0; j < n_jumps; ++j) {
                const double q = st.uniform01() * table_n;
                const auto i = static_cast<size_t>(q);
                const double frac = q - static_cast<double>(i);
                const double jump =
                    (i + 1 <= static_cast<size_t>(table_n))
                        ? jump_at_quantile[i] *
                              std::pow(jump_at_quantile[std::min<size_t>(i + 1, table_n)] /
                                           jump_at_quantile[i],
                                       frac)
                        : jump_at_quantile[table_n];
                total += jump;
            }
            return lambda_arg * total;
        });
    }

    std::vector<Part> parts_;
};

/// Discretized draw of int_0^t e^{-gamma(t-s)} dZ_s for a subordinate
/// Brownian driver with exponent f (cross-validation path; exact stable
/// sampling is preferred whenever f is a pure power law).  The Brownian
/// increment over a subordinator increment dS is Gaussian with variance 2 dS.
inline double sample_convolution_generic(const BernsteinSpec& f, double gamma, double t,
                                         size_t n_steps, RngStream& stream) {
    if (!(t > 0.0)) throw std::invalid_argument("sample_convolution_generic: t must be positive");
    if (n_steps < 1) throw std::invalid_argument("sample_convolution_generic: n_steps >= 1");
    SubordinatorSampler sub(f);
    const double dt = t / static_cast<double>(n_steps);
    double acc = 0.0;
    for (size_t i = 0; i < n_steps; ++i) {
        const double s_left = dt * static_cast<double>(i);
        const double ds = sub.increment(dt, stream);
        const double dz = std::sqrt(2.0 * std::max(ds, 0.0)) * stream.gaussian();
        acc += std::exp(-gamma * (t - s_left)) * dz;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Truncated field states
// ---------------------------------------------------------------------------

/// Coefficients of the truncated mode expansion at one time point, plus the
/// analytic alpha-moment bound on everything that was discarded.
struct FieldSample {
    double t = 0.0;
    std::vector<double> coefficients;  // enumeration order
    size_t truncation_n = 0;
    double tail_norm_bound = 0.0;

    double norm() const {
        double ss = 0.0;
        for (double c : coefficients) ss += c * c;
        return std::sqrt(ss);
    }
};

/// Initial field from a sparse coefficient map (1-based mode index -> value).
inline FieldSample make_field(const std::vector<std::pair<size_t, double>>& sparse,
                              const SpectrumSpec& spectrum, size_t truncation_n,
                              double alpha_m = 0.5) {
    FieldSample fs;
    fs.t = 0.0;
    fs.truncation_n = truncation_n;
    fs.coefficients.assign(truncation_n, 0.0);
    for (const auto& [idx, val] : sparse) {
        if (idx == 0 || idx > truncation_n)
            throw std::invalid_argument("make_field: coefficient index outside truncation");
        fs.coefficients[idx - 1] = val;
    }
    fs.tail_norm_bound = tail_alpha_moment_bound(spectrum, alpha_m, truncation_n);
    return fs;
}

/// One exact Markov step of the truncated field over dt: per mode
/// X <- e^{-gamma dt} X + convolution increment.  Only stable-symmetric mode
/// noise is supported here (exact-in-law per-mode sampling); the weight and
/// intensity enter through the mode measure.
inline FieldSample step_field(const FieldSample& state, double dt,
                              const std::vector<Mode>& modes, uint64_t master_seed,
                              uint64_t scenario_id, uint64_t replicate, uint64_t step_index) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_field: dt must be positive");
    if (modes.size() < state.coefficients.size())
        throw std::invalid_argument("step_field: spectrum modes do not cover the truncation");
    FieldSample next = state;
    next.t = state.t + dt;
    for (size_t n = 0; n < state.coefficients.size(); ++n) {
        const Mode& m = modes[n];
        if (m.measure.kind() != LevyMeasureSpec::Kind::stable_sym)
            throw std::invalid_argument("step_field: exact stepping needs stable mode noise");
        const double alpha = m.measure.alpha();
        // unit-scale equivalent of the mode driver: CF exp(-(sigma_z |h|)^alpha)
        const double sigma_z =
            std::pow(stable_symbol_constant(alpha) * m.measure.intensity(), 1.0 / alpha);
        StreamKey key{scenario_id ^ (step_index << 20), n, replicate};
        RngStream stream(master_seed, key);
        const double inc_scale = sigma_z * ou_stable_scale(alpha, m.gamma, dt);
        next.coefficients[n] = std::exp(-m.gamma * dt) * state.coefficients[n] +
                               sample_sym_stable(alpha, inc_scale, stream);
    }
    return next;
}

// ---------------------------------------------------------------------------
// Law validation
// ---------------------------------------------------------------------------

struct EmpiricalCf {
    std::vector<std::complex<double>> values;
    double half_width = 0.0;  // 3 / sqrt(M)
};

/// (1/M) sum_j e^{i h X_j} on a frequency grid, with the 3/sqrt(M) band.
inline EmpiricalCf empirical_cf(std::span<const double> samples, std::span<const double> h_grid) {
    if (samples.size() < 1000)
        throw std::invalid_argument("empirical_cf: needs at least 10^3 samples");
    EmpiricalCf out;
    out.values.reserve(h_grid.size());
    const double inv_m = 1.0 / static_cast<double>(samples.size());
    for (double h : h_grid) {
        std::complex<double> acc{0.0, 0.0};
        for (double x : samples) {
            acc += std::complex<double>(std::cos(h * x), std::sin(h * x));
        }
        out.values.push_back(acc * inv_m);
    }
    out.half_width = 3.0 / std::sqrt(static_cast<double>(samples.size()));
    return out;
}

}  // namespace cylou
