// Experiment drivers: they confront exact per-mode quantities with the
// explicit bounds and emit structured reports.  Aggregate total variation
// between product laws uses the subadditive per-mode sum, which upper-bounds
// the product TV -- the correct direction for checking upper bounds.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cylou/bounds.hpp"
#include "cylou/criteria.hpp"
#include "cylou/density.hpp"
#include "cylou/sampling.hpp"
#include "cylou/scenario.hpp"
#include "cylou/version.hpp"

namespace cylou {

/// A run that cannot produce a conclusive result (divergent criteria where
/// finite ones are required, unreachable tolerances).  Maps to exit code 2.
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

struct RunRow {
    double t = 0.0;
    long mode = -1;  // -1: aggregate row
    double quantity = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    bool satisfied = true;
    std::vector<double> extra;
};

struct RunReport {
    std::string experiment;
    std::vector<std::string> extra_names;
    std::vector<RunRow> rows;
    nlohmann::ordered_json metadata;  // config hash, seed, version, notes
    double wall_time_sec = 0.0;

    bool any_violation() const {
        for (const auto& r : rows)
            if (!r.satisfied) return true;
        return false;
    }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        out << "# experiment=" << experiment << "\n";
        for (const auto& [key, val] : metadata.items())
            out << "# " << key << "=" << (val.is_string() ? val.get<std::string>() : val.dump())
                << "\n";
        out << "t,mode,quantity,bound,satisfied,slack";
        for (const auto& n : extra_names) out << "," << n;
        out << "\n";
        char buf[64];
        for (const auto& r : rows) {
            auto num = [&](double v) {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                out << buf;
            };
            num(r.t);
            out << ",";
            out << r.mode << ",";
            num(r.quantity);
            out << ",";
            num(r.bound);
            out << ",";
            out << (r.satisfied ? 1 : 0) << ",";
            num(r.slack);
            for (double e : r.extra) {
                out << ",";
                num(e);
            }
            out << "\n";
        }
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["experiment"] = experiment;
        j["metadata"] = metadata;
        j["wall_time_sec"] = wall_time_sec;
        auto rows_json = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json o;
            o["t"] = r.t;
            o["mode"] = r.mode;
            o["quantity"] = r.quantity;
            o["bound"] = std::isfinite(r.bound) ? nlohmann::ordered_json(r.bound)
                                                : nlohmann::ordered_json("inf");
            o["satisfied"] = r.satisfied;
            o["slack"] = r.slack;
            for (size_t i = 0; i < r.extra.size() && i < extra_names.size(); ++i)
                o[extra_names[i]] = r.extra[i];
            rows_json.push_back(std::move(o));
        }
        j["rows"] = std::move(rows_json);
        return j;
    }

    void write_json(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        out << to_json().dump(2) << "\n";
    }
};

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> dense_coeffs(const std::map<size_t, double>& sparse, size_t n) {
    std::vector<double> v(n, 0.0);
    for (const auto& [k, val] : sparse) {
        if (k >= 1 && k <= n) v[k - 1] = val;
    }
    return v;
}

inline double l2_norm(std::span<const double> v) {
    double ss = 0.0;
    for (double x : v) ss += x * x;
    return std::sqrt(ss);
}

inline nlohmann::ordered_json base_metadata(const ScenarioConfig& cfg) {
    nlohmann::ordered_json m;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(cfg.hash()));
    m["config_hash"] = hash;
    m["version"] = kVersion;
    m["master_seed"] = cfg.master_seed;
    return m;
}

/// Exponent of the stationary mode law int_0^infty f(e^{-2 gamma s} r) ds
/// (gamma > 0): closed form c r^a / (2 a gamma) for power laws, otherwise the
/// substitution integral (1/(2 gamma)) int_0^1 f(u r)/u du.
inline std::function<double(double)> stationary_exponent(const BernsteinSpec& f, double gamma) {
    if (!(gamma > 0.0))
        throw std::invalid_argument("stationary_exponent: needs gamma > 0");
    if (auto st = f.as_stable()) {
        const auto [a, c] = *st;
        const double coef = c / (2.0 * a * gamma);
        return [a, coef](double r) { return coef * std::pow(r, a); };
    }
    return [f, gamma](double r) {
        if (r == 0.0) return 0.0;
        AdaptiveOptions opt;
        opt.rel_tol = 1e-9;
        return integrate_adaptive([&](double u) { return f(u * r) / (2.0 * gamma * u); }, 0.0,
                                  1.0, opt)
            .value;
    };
}

/// Exact TV distance between Cauchy(center, s1) and Cauchy(0, s2) from the
/// crossing points and the arctan antiderivative.
inline double tv_cauchy_exact(double center, double s1, double s2) {
    auto cdf_diff = [&](double x) {
        return (std::atan((x - center) / s1) - std::atan(x / s2)) / std::numbers::pi;
    };
    std::vector<double> roots;
    const double a2 = s1 - s2;
    const double b2 = 2.0 * s2 * center;
    const double c2 = s1 * s2 * s2 - s2 * s1 * s1 - s2 * center * center;
    if (std::fabs(a2) < 1e-15 * (s1 + s2)) {
        if (std::fabs(center) < 1e-300) return 0.0;
        roots.push_back(0.5 * center);
    } else {
        const double disc = b2 * b2 - 4.0 * a2 * c2;
        if (disc > 0.0) {
            const double sq = std::sqrt(disc);
            roots.push_back((-b2 - sq) / (2.0 * a2));
            roots.push_back((-b2 + sq) / (2.0 * a2));
            if (roots[0] > roots[1]) std::swap(roots[0], roots[1]);
        }
    }
    double tv = 0.0;
    double prev = -std::numeric_limits<double>::infinity();
    double prev_cdf = 0.0;  // lim of cdf_diff at -infinity
    for (double r : roots) {
        const double here = cdf_diff(r);
        tv += std::fabs(here - prev_cdf);
        prev_cdf = here;
        prev = r;
    }
    (void)prev;
    tv += std::fabs(0.0 - prev_cdf);  // segment up to +infinity
    return 0.5 * tv;
}

struct ModeTv {
    double value = 0.0;
    double uncertainty = 0.0;
};

/// TV between the mode law at time t (center e^{-gamma t} x_n) and the mode
/// stationary law.  Stable Cauchy modes evaluate in closed form; everything
/// else goes through density grids on a shared lattice.
inline ModeTv mode_stationarity_gap(const Mode& m, double t, double x_n) {
    const double center = std::exp(-m.gamma * t) * x_n;
    if (m.measure.kind() == LevyMeasureSpec::Kind::stable_sym) {
        const double alpha = m.measure.alpha();
        const double sigma_z =
            std::pow(stable_symbol_constant(alpha) * m.measure.intensity(), 1.0 / alpha);
        const double s_t = sigma_z * ou_stable_scale(alpha, m.gamma, t);
        const double s_inf = sigma_z * std::pow(1.0 / (alpha * m.gamma), 1.0 / alpha);
        if (std::fabs(s_inf / s_t - 1.0) < 1e-13 && std::fabs(center) < 1e-13 * s_inf)
            return {0.0, 0.0};
        if (alpha == 1.0) return {tv_cauchy_exact(center, s_t, s_inf), 0.0};
        DensityParams prm = DensityParams::fast();
        prm.half_width = (alpha < 1.9 ? 256.0 : 16.0) * s_inf;
        prm.step = s_t / 16.0;
        auto g_t = compute_density_from_exponent(
            [&](double h) { return std::pow(s_t * std::fabs(h), alpha); }, prm);
        auto g_inf = compute_density_from_exponent(
            [&](double h) { return std::pow(s_inf * std::fabs(h), alpha); }, prm);
        auto tv = tv_distance_between(g_t, g_inf, center);
        return {tv.value, tv.uncertainty};
    }
    if (!m.symbol_f)
        throw NumericalFailure("ergodicity proxy: mode without a samplable/evaluable law");
    IntegratedExponent F(*m.symbol_f, m.gamma, t);
    auto e_inf = stationary_exponent(*m.symbol_f, m.gamma);
    // shared grid from the stationary scale
    DensityParams prm = DensityParams::fast();
    auto g_inf = compute_density_from_exponent([&](double h) { return e_inf(h * h); }, prm);
    prm.half_width = g_inf.half_width;
    prm.step = g_inf.step;
    auto g_t = compute_density(F, prm, true);
    auto tv = tv_distance_between(g_t, g_inf, center);
    return {tv.value, tv.uncertainty};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// experiments
// ---------------------------------------------------------------------------

/// Exact per-mode TV between the laws started from x0 and y0 versus the
/// coupling bound 2 C_t ||x0 - y0||.
inline RunReport run_tv_decay(const ScenarioConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunReport rep;
    rep.experiment = "tv_decay";
    rep.extra_names = {"norm_xy", "A_t", "C_t_subordinate", "C_t_general", "tv_uncertainty"};
    rep.metadata = detail::base_metadata(cfg);

    auto modes = cfg.spectrum.enumerate(cfg.truncation_n);
    const auto x0 = detail::dense_coeffs(cfg.x0, cfg.truncation_n);
    const auto y0 = detail::dense_coeffs(cfg.y0, cfg.truncation_n);
    double norm_xy = 0.0;
    for (size_t i = 0; i < x0.size(); ++i) norm_xy += (x0[i] - y0[i]) * (x0[i] - y0[i]);
    norm_xy = std::sqrt(norm_xy);

    for (double t : cfg.t_grid) {
        const auto c_gen = coupling_bound_C_general(cfg.spectrum, t);
        double a_val = std::numeric_limits<double>::quiet_NaN();
        double c_sub_val = std::numeric_limits<double>::quiet_NaN();
        try {
            a_val = gradient_bound_A(cfg.spectrum, t).value;
            c_sub_val = coupling_bound_C_subordinate(cfg.spectrum, t).value;
        } catch (const std::invalid_argument&) {
            // modes without a subordination exponent: only C_t_general applies
        }

        double tv_sum = 0.0;
        double tv_unc = 0.0;
        for (size_t n = 0; n < modes.size(); ++n) {
            const double diff = x0[n] - y0[n];
            if (diff == 0.0) continue;
            const double shift = std::exp(-modes[n].gamma * t) * diff;
            if (!modes[n].symbol_f)
                throw NumericalFailure("tv_decay: mode " + std::to_string(n + 1) +
                                       " has no evaluable convolution exponent");
            IntegratedExponent F(*modes[n].symbol_f, modes[n].gamma, t);
            auto g = compute_density(F, {}, true);
            auto tv = tv_distance_1d(g, shift);
            tv_sum += tv.value;
            tv_unc += tv.uncertainty;
        }
        const double bound = 2.0 * c_gen.value * norm_xy;
        RunRow row;
        row.t = t;
        row.quantity = tv_sum;
        row.bound = bound;
        row.slack = cfg.tolerances.bound_slack * (1.0 + std::fabs(bound));
        row.satisfied = !(tv_sum + tv_unc > bound + row.slack);
        row.extra = {norm_xy, a_val, c_sub_val, c_gen.value, tv_unc};
        rep.rows.push_back(std::move(row));
    }
    rep.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

/// Per-mode exact gradient norms against their per-mode integrals, and the
/// running max against A_t and the C_t constants.
inline RunReport run_gradient_check(const ScenarioConfig& cfg, size_t gradient_modes = 6) {
    const auto start = std::chrono::steady_clock::now();
    RunReport rep;
    rep.experiment = "gradient_check";
    rep.extra_names = {"A_t", "C_t_subordinate", "C_t_general"};
    rep.metadata = detail::base_metadata(cfg);

    const size_t n_eval = std::min(cfg.truncation_n, gradient_modes);
    auto modes = cfg.spectrum.enumerate(n_eval);

    for (double t : cfg.t_grid) {
        const auto a_rep = gradient_bound_A(cfg.spectrum, t);
        const auto c_sub = coupling_bound_C_subordinate(cfg.spectrum, t);
        const auto c_gen = coupling_bound_C_general(cfg.spectrum, t);
        double max_norm = 0.0;
        for (size_t n = 0; n < modes.size(); ++n) {
            if (!modes[n].symbol_f)
                throw NumericalFailure("gradient_check: mode without subordination exponent");
            IntegratedExponent F(*modes[n].symbol_f, modes[n].gamma, t);
            auto g = compute_density(F, {}, true);
            const double norm = gradient_norm_1d(g, modes[n].gamma, t);
            auto dec = exp_decay_integral(F);
            const double mode_bound =
                std::sqrt(2.0 * std::exp(-2.0 * modes[n].gamma * t) * dec.value);
            max_norm = std::max(max_norm, norm);
            RunRow row;
            row.t = t;
            row.mode = static_cast<long>(n + 1);
            row.quantity = norm;
            row.bound = mode_bound;
            row.slack = cfg.tolerances.bound_slack * (1.0 + std::fabs(mode_bound));
            row.satisfied = !(norm > mode_bound + row.slack);
            row.extra = {a_rep.value, c_sub.value, c_gen.value};
            rep.rows.push_back(std::move(row));
        }
        RunRow agg;
        agg.t = t;
        agg.mode = -1;
        agg.quantity = max_norm;
        agg.bound = a_rep.value;
        agg.slack = cfg.tolerances.bound_slack * (1.0 + std::fabs(a_rep.value));
        agg.satisfied = !(max_norm > a_rep.value + agg.slack);
        agg.extra = {a_rep.value, c_sub.value, c_gen.value};
        rep.rows.push_back(std::move(agg));
    }
    rep.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

/// Per-mode TV sum to the stationary product law versus the explicit
/// ergodicity bound; refuses (NumericalFailure) when the moment criteria are
/// not conclusively finite.
inline RunReport run_ergodicity(const ScenarioConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunReport rep;
    rep.experiment = "ergodicity";
    rep.extra_names = {"C_t_general", "tv_uncertainty"};
    rep.metadata = detail::base_metadata(cfg);

    const auto crit =
        ergodicity_criterion(cfg.spectrum, cfg.alpha_m, cfg.modes_max, cfg.tolerances.criterion_tol);
    if (!crit.both_finite())
        throw NumericalFailure(std::string("ergodicity: moment criteria not finite (S2 ") +
                               to_string(crit.s2.verdict) + ", S_alpha " +
                               to_string(crit.s_alpha.verdict) +
                               "); see the criteria reports for the per-mode terms");
    const double s2 = crit.s2.value();
    const double s_alpha = crit.s_alpha.value();
    rep.metadata["S2"] = s2;
    rep.metadata["S_alpha"] = s_alpha;

    auto modes = cfg.spectrum.enumerate(cfg.truncation_n);
    const auto x0 = detail::dense_coeffs(cfg.x0, cfg.truncation_n);
    const double x_norm = detail::l2_norm(x0);
    rep.metadata["tail_norm_bound"] =
        tail_alpha_moment_bound(cfg.spectrum, cfg.alpha_m, cfg.truncation_n);

    std::vector<double> log_proxy, log_ct;
    for (double t : cfg.t_grid) {
        const auto c_gen = coupling_bound_C_general(cfg.spectrum, t);
        const double bound = ergodicity_bound(c_gen, s2, s_alpha, x_norm, cfg.alpha_m);
        double proxy = 0.0, unc = 0.0;
        for (size_t n = 0; n < modes.size(); ++n) {
            auto mtv = detail::mode_stationarity_gap(modes[n], t, x0[n]);
            proxy += mtv.value;
            unc += mtv.uncertainty;
        }
        RunRow row;
        row.t = t;
        row.quantity = proxy;
        row.bound = bound;
        row.slack = cfg.tolerances.bound_slack * (1.0 + std::fabs(bound));
        row.satisfied = !(proxy + unc > bound + row.slack);
        row.extra = {c_gen.value, unc};
        rep.rows.push_back(std::move(row));
        if (proxy > 0.0 && c_gen.value > 0.0) {
            log_proxy.push_back(std::log(proxy));
            log_ct.push_back(cfg.alpha_m * std::log(c_gen.value));
        }
    }
    // diagnostic decay-rate fit: log(proxy) against log(C_t^alpha)
    if (log_proxy.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < log_proxy.size(); ++i) {
            sx += log_ct[i];
            sy += log_proxy[i];
            sxx += log_ct[i] * log_ct[i];
            sxy += log_ct[i] * log_proxy[i];
        }
        const double n = static_cast<double>(log_proxy.size());
        const double denom = n * sxx - sx * sx;
        if (std::fabs(denom) > 1e-12)
            rep.metadata["proxy_vs_ct_slope"] = (n * sxy - sx * sy) / denom;
    }
    rep.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

/// Phase diagram over (d, alpha, beta): closed-form threshold versus the
/// numeric criterion verdicts.  Rows: quantity = margin, bound = 0, satisfied
/// = "no conclusive disagreement"; extras carry the verdict codes
/// (1 finite / 0 inconclusive / -1 divergent).
inline RunReport run_membership_sweep(const ScenarioConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunReport rep;
    rep.experiment = "membership_sweep";
    rep.extra_names = {"d",          "alpha",        "beta",     "threshold_met",
                       "state_code", "s2_code",      "sa_code",  "conclusive",
                       "agree"};
    rep.metadata = detail::base_metadata(cfg);

    auto code = [](SeriesVerdict v) {
        switch (v) {
            case SeriesVerdict::finite: return 1.0;
            case SeriesVerdict::divergent: return -1.0;
            case SeriesVerdict::inconclusive: return 0.0;
        }
        return 0.0;
    };

    size_t conclusive_cells = 0, agreeing_cells = 0, total_cells = 0;
    for (int d : cfg.sweep_d) {
        for (double alpha : cfg.sweep_alpha) {
            for (double beta : cfg.sweep_beta) {
                ++total_cells;
                const auto thr = heat_equation_threshold(d, alpha, beta);
                const auto spectrum = SpectrumSpec::heat_equation(d, alpha, beta, 1.0);
                const double alpha_m = std::min(1.0, 0.5 * alpha);
                const auto state =
                    state_space_criterion(spectrum, cfg.modes_max, cfg.tolerances.sweep_tol);
                const auto erg = ergodicity_criterion(spectrum, alpha_m, cfg.modes_max,
                                                      cfg.tolerances.sweep_tol);
                const bool conclusive = state.verdict != SeriesVerdict::inconclusive &&
                                        erg.s2.verdict != SeriesVerdict::inconclusive &&
                                        erg.s_alpha.verdict != SeriesVerdict::inconclusive;
                bool agree = true;
                if (conclusive) {
                    const bool want = thr.met;
                    agree = (want == (state.verdict == SeriesVerdict::finite)) &&
                            (want == (erg.s2.verdict == SeriesVerdict::finite)) &&
                            (want == (erg.s_alpha.verdict == SeriesVerdict::finite));
                    ++conclusive_cells;
                    if (agree) ++agreeing_cells;
                }
                RunRow row;
                row.t = 0.0;
                row.quantity = thr.margin;
                row.bound = 0.0;
                row.slack = 0.0;
                row.satisfied = !conclusive || agree;
                row.extra = {static_cast<double>(d), alpha,
                             beta,  thr.met ? 1.0 : 0.0,
                             code(state.verdict), code(erg.s2.verdict),
                             code(erg.s_alpha.verdict), conclusive ? 1.0 : 0.0,
                             agree ? 1.0 : 0.0};
                rep.rows.push_back(std::move(row));
            }
        }
    }
    rep.metadata["cells"] = total_cells;
    rep.metadata["conclusive_cells"] = conclusive_cells;
    rep.metadata["agreeing_cells"] = agreeing_cells;
    rep.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace cylou
