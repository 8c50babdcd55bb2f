// One-dimensional marginal densities of stochastic convolutions, recovered
// from the characteristic function e^{-F_t(h^2)} by cosine-transform
// inversion on a uniform grid, plus the functionals built on top of them:
// Fisher-type integral, total-variation distances and gradient norms.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cylou/exponent.hpp"
#include "cylou/quadrature.hpp"

namespace cylou {

namespace detail {

inline void parallel_for(size_t begin, size_t end, const std::function<void(size_t)>& body) {
    const size_t n = end > begin ? end - begin : 0;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw < 2 || n < 256) {
        for (size_t i = begin; i < end; ++i) body(i);
        return;
    }
    const unsigned workers = std::min<unsigned>(hw, 8);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const size_t lo = begin + w * chunk;
        const size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

struct DensityParams {
    double half_width = 0.0;   // 0 = auto from the characteristic-function scale
    double step = 0.0;         // 0 = auto (sigma/32)
    double h_step = 0.0;       // 0 = auto (pi / (4 * half_width))
    double cf_log_cut = 27.631021115928547;  // -log(1e-12)
    double h_max = 1e9;        // give up on the cutoff search beyond this
    size_t max_points = (size_t{1} << 23);
    double step_divisor = 32.0;
    double width_sigma_heavy = 512.0;  // half-width in sigma units, heavy tails
    double width_sigma_light = 16.0;

    static DensityParams fast() {
        DensityParams p;
        p.step_divisor = 16.0;
        p.width_sigma_heavy = 256.0;
        return p;
    }
};

/// Sampled even density p and derivative p' on the uniform grid
/// x_j = -half_width + j*step, with the bookkeeping the downstream
/// functionals need (mass accounting, inversion tail, clipping).
struct DensityGrid {
    double step = 0.0;
    double half_width = 0.0;
    std::vector<double> p;    // size 2*m+1, p[m] is x = 0
    std::vector<double> dp;
    double mass_grid = 0.0;        // Simpson mass on the grid
    double tail_model_mass = 0.0;  // fitted off-grid mass (both sides)
    double mass_defect = 0.0;      // |1 - (grid + model)|
    double inversion_tail_bound = 0.0;
    double clip_total = 0.0;       // negative mass clipped to zero
    double sigma_scale = 1.0;      // 1/h where the exponent crosses 1
    bool heavy_tail_flag = false;  // exponent order < 0.5: grid likely too narrow

    size_t center() const { return p.size() / 2; }
    double x_at(size_t j) const { return -half_width + step * static_cast<double>(j); }

    double value_at(double x) const { return interp(p, x); }
    double deriv_at(double x) const { return interp(dp, x); }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "# step=%.17g half_width=%.17g mass_defect=%.3g\n",
                      step, half_width, mass_defect);
        out << buf;
        std::snprintf(buf, sizeof(buf), "# inversion_tail_bound=%.3g clip_total=%.3g\n",
                      inversion_tail_bound, clip_total);
        out << buf;
        out << "x,p,dp\n";
        for (size_t j = 0; j < p.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x_at(j), p[j], dp[j]);
            out << buf;
        }
    }

private:
    // 4-point (Catmull-Rom) interpolation; clamps to 0 outside the grid
    double interp(const std::vector<double>& v, double x) const {
        const double u = (x + half_width) / step;
        if (u < 0.0 || u > static_cast<double>(v.size() - 1)) return 0.0;
        const auto i = static_cast<size_t>(u);
        const double f = u - static_cast<double>(i);
        if (i + 1 >= v.size()) return v.back();
        if (i == 0 || i + 2 >= v.size())
            return v[i] * (1.0 - f) + v[i + 1] * f;
        const double y0 = v[i - 1], y1 = v[i], y2 = v[i + 1], y3 = v[i + 2];
        const double a = -0.5 * y0 + 1.5 * y1 - 1.5 * y2 + 0.5 * y3;
        const double b = y0 - 2.5 * y1 + 2.0 * y2 - 0.5 * y3;
        const double c = -0.5 * y0 + 0.5 * y2;
        return ((a * f + b) * f + c) * f + y1;
    }
};

namespace detail {

/// Core inversion from the exponent E(h) = -log CF(h), assumed even in h.
inline DensityGrid invert_exponent(const std::function<double(double)>& exponent,
                                   const DensityParams& prm) {
    DensityGrid g;

    // characteristic scale: E(1/sigma) = 1
    double h1 = 1.0;
    if (exponent(h1) < 1.0) {
        while (exponent(h1) < 1.0 && h1 < prm.h_max) h1 *= 2.0;
    } else {
        while (exponent(h1 * 0.5) >= 1.0 && h1 > 1e-300) h1 *= 0.5;
    }
    {  // bisect to ~1% so the auto grid is stable
        double lo = h1 * 0.5, hi = h1;
        for (int it = 0; it < 30; ++it) {
            const double mid = 0.5 * (lo + hi);
            (exponent(mid) < 1.0 ? lo : hi) = mid;
        }
        h1 = hi;
    }
    const double sigma = 1.0 / h1;
    g.sigma_scale = sigma;

    // local order of the exponent: alpha_eff ~ 2 is Gaussian-like
    const double e1 = exponent(h1);
    const double e2 = exponent(2.0 * h1);
    const double alpha_eff = std::log2(std::max(e2, 1e-300) / std::max(e1, 1e-300));
    g.heavy_tail_flag = alpha_eff < 0.5;

    const double width_mult = alpha_eff < 1.9 ? prm.width_sigma_heavy : prm.width_sigma_light;
    double L = prm.half_width > 0.0 ? prm.half_width : width_mult * sigma;
    const double dx = prm.step > 0.0 ? prm.step : sigma / prm.step_divisor;
    size_t m = static_cast<size_t>(std::ceil(L / dx));
    if (2 * m + 1 > prm.max_points)
        throw std::invalid_argument("compute_density: grid would exceed max_points");
    L = dx * static_cast<double>(m);

    const double dh = prm.h_step > 0.0 ? prm.h_step : std::numbers::pi / (4.0 * L);

    // cutoff H* with E(H*) above the log tolerance
    double h_cut = dh;
    double e_cut = exponent(h_cut);
    while (e_cut < prm.cf_log_cut) {
        h_cut *= 2.0;
        if (h_cut > prm.h_max)
            throw std::runtime_error(
                "compute_density: characteristic function decays too slowly to resolve "
                "(exponent fails the superlogarithmic growth condition)");
        e_cut = exponent(h_cut);
    }
    {  // shrink back to the smallest multiple of dh that clears the cut
        double lo = h_cut * 0.5, hi = h_cut;
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            (exponent(mid) < prm.cf_log_cut ? lo : hi) = mid;
        }
        h_cut = hi;
    }
    const size_t nh = static_cast<size_t>(std::ceil(h_cut / dh));

    // tabulate the characteristic function once
    std::vector<double> cf(nh + 1);
    detail::parallel_for(0, nh + 1, [&](size_t k) {
        cf[k] = std::exp(-exponent(dh * static_cast<double>(k)));
    });
    g.inversion_tail_bound = cf[nh] * h_cut / std::numbers::pi;

    g.step = dx;
    g.half_width = L;
    g.p.assign(2 * m + 1, 0.0);
    g.dp.assign(2 * m + 1, 0.0);

    // trapezoid in h; the uniform grid makes this spectrally accurate for the
    // cosine transform (aliases land at 2 pi / dh >= 8 L away)
    const double wp = dh / std::numbers::pi;
    detail::parallel_for(0, m + 1, [&](size_t jj) {
        const double x = static_cast<double>(jj) * dx;
        const double cd = std::cos(dh * x);
        const double sd = std::sin(dh * x);
        double c = 1.0, s = 0.0;  // cos/sin of h_k x
        double acc_p = 0.5 * cf[0];
        double acc_q = 0.0;
        for (size_t k = 1; k <= nh; ++k) {
            const double cn = c * cd - s * sd;
            const double sn = s * cd + c * sd;
            c = cn;
            s = sn;
            if ((k & 2047u) == 0) {  // periodic resync of the rotation
                const double ph = dh * static_cast<double>(k) * x;
                c = std::cos(ph);
                s = std::sin(ph);
            }
            const double w = (k == nh) ? 0.5 * cf[k] : cf[k];
            acc_p += w * c;
            acc_q += w * s * (dh * static_cast<double>(k));
        }
        const size_t mid = m;
        g.p[mid + jj] = wp * acc_p;
        g.dp[mid + jj] = -wp * acc_q;
        if (jj > 0) {
            g.p[mid - jj] = g.p[mid + jj];
            g.dp[mid - jj] = -g.dp[mid + jj];
        }
    });

    // clip tiny negative excursions, keep the book
    double clip = 0.0;
    for (double& v : g.p) {
        if (v < 0.0) {
            clip += -v;
            v = 0.0;
        }
    }
    g.clip_total = clip * dx;

    g.mass_grid = simpson_tabulated(g.p, dx);

    // off-grid mass from a local power fit at the edge; exponential-decay
    // densities contribute nothing measurable here.  The trapezoid inversion
    // folds the far tail back into the window (aliases at 2 pi / dh - x), so
    // the folded share of the modeled tail is taken out of the balance.
    const double p_edge = g.p.back();
    double fold_mass = 0.0;
    if (p_edge > 1e-300) {
        const size_t j_in = static_cast<size_t>(std::llround(0.8 * static_cast<double>(m)));
        const double p_in = g.p[g.center() + j_in];
        const double x_in = static_cast<double>(j_in) * dx;
        if (p_in > p_edge) {
            const double slope = std::log(p_in / p_edge) / std::log(L / x_in);
            if (slope > 1.05) {
                g.tail_model_mass = 2.0 * p_edge * L / (slope - 1.0);
                const double fold_center = 2.0 * std::numbers::pi / dh;
                if (fold_center > 2.0 * L)
                    fold_mass = g.tail_model_mass *
                                std::pow(L / (fold_center - L), slope - 1.0);
            }
        }
    }
    g.mass_defect = std::fabs(1.0 - (g.mass_grid + g.tail_model_mass - fold_mass));
    return g;
}

}  // namespace detail

/// Density of the stochastic convolution whose characteristic function is
/// e^{-F_t(h^2)}.  Unless `force` is set, non-power-law exponents must pass
/// the superlogarithmic growth check first (otherwise no bounded density is
/// guaranteed to exist).
inline DensityGrid compute_density(const IntegratedExponent& F, const DensityParams& prm = {},
                                   bool force = false) {
    if (!force && !F.as_stable()) {
        const auto rep = superlog_growth_check(F.f());
        if (rep.verdict == SuperlogReport::Verdict::violated)
            throw std::invalid_argument(
                "compute_density: f fails the superlogarithmic growth condition");
    }
    return detail::invert_exponent([&F](double h) { return F(h * h); }, prm);
}

/// Inversion from a raw exponent h -> E(h) (test and cross-validation entry).
inline DensityGrid compute_density_from_exponent(const std::function<double(double)>& exponent,
                                                 const DensityParams& prm = {}) {
    return detail::invert_exponent(exponent, prm);
}

/// Grid filled from a closed-form density (exact fast path; the inversion
/// route is cross-validated against it in the tests).
inline DensityGrid density_from_closed_form(const std::function<double(double)>& pdf,
                                            const std::function<double(double)>& dpdf,
                                            double half_width, double step) {
    DensityGrid g;
    const size_t m = static_cast<size_t>(std::ceil(half_width / step));
    g.step = step;
    g.half_width = step * static_cast<double>(m);
    g.p.resize(2 * m + 1);
    g.dp.resize(2 * m + 1);
    for (size_t j = 0; j < g.p.size(); ++j) {
        const double x = g.x_at(j);
        g.p[j] = pdf(x);
        g.dp[j] = dpdf(x);
    }
    g.mass_grid = simpson_tabulated(g.p, step);
    const double p_edge = g.p.back();
    if (p_edge > 1e-300) {
        const size_t j_in = static_cast<size_t>(std::llround(0.8 * static_cast<double>(m)));
        const double p_in = g.p[g.center() + j_in];
        const double x_in = static_cast<double>(j_in) * step;
        if (p_in > p_edge) {
            const double slope = std::log(p_in / p_edge) / std::log(g.half_width / x_in);
            if (slope > 1.05) g.tail_model_mass = 2.0 * p_edge * g.half_width / (slope - 1.0);
        }
    }
    g.mass_defect = std::fabs(1.0 - (g.mass_grid + g.tail_model_mass));
    g.sigma_scale = 1.0;
    return g;
}

struct FisherResult {
    double value = 0.0;
    bool tail_flagged = false;     // part of the grid sat below the floor
    double floored_fraction = 0.0;
};

/// int (p')^2 / p over the region where p clears the positivity floor.
inline FisherResult fisher_integral(const DensityGrid& g, double floor_frac = 1e-14) {
    double pmax = 0.0;
    for (double v : g.p) pmax = std::max(pmax, v);
    if (!(pmax > 0.0)) throw std::invalid_argument("fisher_integral: empty density");
    const double floor = floor_frac * pmax;

    std::vector<double> integrand(g.p.size(), 0.0);
    size_t floored = 0;
    for (size_t j = 0; j < g.p.size(); ++j) {
        if (g.p[j] >= floor) {
            integrand[j] = g.dp[j] * g.dp[j] / g.p[j];
        } else {
            ++floored;
        }
    }
    if (floored * 2 > g.p.size())
        throw std::invalid_argument(
            "fisher_integral: density below the floor on most of the grid");
    FisherResult out;
    out.value = simpson_tabulated(integrand, g.step);
    out.floored_fraction = static_cast<double>(floored) / static_cast<double>(g.p.size());
    out.tail_flagged = floored > 0;
    return out;
}

struct TvResult {
    double value = 0.0;        // (1/2) int |p - q|
    double uncertainty = 0.0;  // off-grid tails of both densities
};

/// Total-variation distance (1/2) int |p1(. - shift) - p2| for two densities
/// sampled on identical grids.  The integrand is split at its sign changes so
/// each smooth piece integrates with Simpson accuracy.
inline TvResult tv_distance_between(const DensityGrid& g1, const DensityGrid& g2,
                                    double shift = 0.0) {
    if (g1.p.size() != g2.p.size() || std::fabs(g1.step - g2.step) > 1e-15 * g1.step)
        throw std::invalid_argument("tv_distance_between: grids must match");
    const double L = g1.half_width;
    if (std::fabs(shift) > L / 4.0)
        throw std::invalid_argument("tv_distance_between: shift too large for grid");

    const size_t n = g1.p.size();
    std::vector<double> d(n);
    const long off = std::lround(shift / g1.step);
    const bool integral_shift = std::fabs(shift - static_cast<double>(off) * g1.step) <
                                1e-12 * std::max(1.0, std::fabs(shift));
    for (size_t j = 0; j < n; ++j) {
        double v1;
        if (integral_shift) {
            const long src = static_cast<long>(j) - off;
            v1 = (src >= 0 && src < static_cast<long>(n)) ? g1.p[static_cast<size_t>(src)] : 0.0;
        } else {
            v1 = g1.value_at(g1.x_at(j) - shift);
        }
        d[j] = v1 - g2.p[j];
    }

    // accumulate |integral| over single-signed runs, splitting cells at the
    // linearly interpolated roots
    double total = 0.0;
    std::vector<double> seg;
    seg.push_back(d[0]);
    auto flush_run = [&](std::vector<double>& cells) {
        if (cells.size() >= 2) total += std::fabs(simpson_tabulated(cells, g1.step));
        cells.clear();
    };
    for (size_t j = 1; j < n; ++j) {
        if ((d[j - 1] >= 0.0) == (d[j] >= 0.0)) {
            seg.push_back(d[j]);
            continue;
        }
        // root inside the cell
        const double frac = d[j - 1] / (d[j - 1] - d[j]);
        // close current run with the triangle up to the root
        total += std::fabs(simpson_tabulated(seg, g1.step)) +
                 0.5 * std::fabs(d[j - 1]) * frac * g1.step;
        seg.clear();
        total += 0.5 * std::fabs(d[j]) * (1.0 - frac) * g1.step;
        seg.push_back(d[j]);
    }
    flush_run(seg);

    TvResult out;
    out.value = 0.5 * total;
    out.uncertainty = 0.5 * (g1.tail_model_mass + g2.tail_model_mass) +
                      0.5 * (g1.clip_total + g2.clip_total);
    out.value = std::min(out.value, 1.0);
    return out;
}

/// Shift-only distance on a single density: TV(p(. - shift), p).
inline TvResult tv_distance_1d(const DensityGrid& g, double shift) {
    return tv_distance_between(g, g, shift);
}

/// Exact one-mode operator norm of the semigroup gradient for worst
/// measurable observables: e^{-gamma t} int |p'|.  The integral is the total
/// variation of p, accumulated over monotone runs, plus the monotone tails.
inline double gradient_norm_1d(const DensityGrid& g, double gamma, double t) {
    double tv = 0.0;
    for (size_t j = 1; j < g.p.size(); ++j) tv += std::fabs(g.p[j] - g.p[j - 1]);
    tv += g.p.front() + g.p.back();  // tails decay monotonically to zero
    return std::exp(-gamma * t) * tv;
}

}  // namespace cylou
