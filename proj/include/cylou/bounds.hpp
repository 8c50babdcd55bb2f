// The explicit constants of the gradient / total-variation / ergodicity
// estimates: A_t for cylindrical subordinate Brownian drivers, the two C_t
// variants (subordinate and general, the latter carrying the cos(1) factors),
// and the bounds assembled from them.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cylou/criteria.hpp"
#include "cylou/exponent.hpp"
#include "cylou/spectrum.hpp"

namespace cylou {

enum class BoundFormula { A_t, C_t_subordinate, C_t_general };

inline const char* to_string(BoundFormula f) {
    switch (f) {
        case BoundFormula::A_t: return "A_t";
        case BoundFormula::C_t_subordinate: return "C_t_subordinate";
        case BoundFormula::C_t_general: return "C_t_general";
    }
    return "?";
}

struct BoundReport {
    BoundFormula formula = BoundFormula::A_t;
    double t = 0.0;
    double value = std::numeric_limits<double>::infinity();  // sqrt(2 sup_k term_k)
    size_t argmax_mode = 0;       // 1-based
    size_t stabilized_at = 0;     // modes scanned when the sup was declared stable
    bool stabilized = false;
    std::vector<double> per_mode_terms;
    std::optional<size_t> offending_mode;  // mode with a divergent integral
    std::string note;

    bool finite() const { return std::isfinite(value); }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["formula"] = to_string(formula);
        j["t"] = t;
        j["value"] = std::isfinite(value) ? nlohmann::ordered_json(value)
                                          : nlohmann::ordered_json("inf");
        j["argmax_mode"] = argmax_mode;
        j["stabilized_at"] = stabilized_at;
        j["stabilized"] = stabilized;
        if (offending_mode) j["offending_mode"] = *offending_mode;
        if (!note.empty()) j["note"] = note;
        return j;
    }
};

namespace detail {

// e^{-w gamma t} window int_0^t e^{-w gamma s} ds, stable as gamma -> 0
inline double decay_window(double w_gamma, double t) {
    const double x = w_gamma * t;
    if (x < 1e-12) return t;
    return -std::expm1(-x) / w_gamma;
}

// running-sup scan with stabilization: stop once the per-mode upper envelope
// has stayed below the running max for a full decade of modes
inline BoundReport scan_sup(const SpectrumSpec& spectrum, double t, size_t k_max,
                            BoundFormula formula,
                            const std::function<double(const Mode&)>& term_fn,
                            const std::function<double(const Mode&)>& envelope_fn) {
    BoundReport rep;
    rep.formula = formula;
    rep.t = t;
    if (!(t > 0.0)) throw std::invalid_argument("bound scan: t must be positive");

    const size_t limit = std::min(k_max, spectrum.mode_count_limit());
    auto modes = spectrum.enumerate(limit);

    double sup = 0.0;
    size_t argmax = 0;
    size_t below_start = 0;  // start (1-based) of the run with envelope < sup
    size_t scanned = 0;

    for (size_t k = 0; k < modes.size(); ++k) {
        scanned = k + 1;
        double term;
        try {
            term = term_fn(modes[k]);
        } catch (const std::exception& e) {
            rep.offending_mode = k + 1;
            rep.note = std::string("mode term failed: ") + e.what();
            rep.value = std::numeric_limits<double>::infinity();
            return rep;
        }
        if (!std::isfinite(term)) {
            rep.offending_mode = k + 1;
            rep.note = "divergent exponential-decay integral";
            rep.value = std::numeric_limits<double>::infinity();
            rep.per_mode_terms.push_back(term);
            return rep;
        }
        rep.per_mode_terms.push_back(term);
        if (term > sup) {
            sup = term;
            argmax = k + 1;
            below_start = 0;
        }
        const double env = envelope_fn(modes[k]);
        if (env < sup) {
            if (below_start == 0) below_start = k + 1;
            if (scanned >= 10 * below_start) {
                rep.stabilized = true;
                break;
            }
        } else {
            below_start = 0;
        }
    }
    if (!rep.stabilized && spectrum.kind() == SpectrumSpec::Kind::explicit_list &&
        scanned == spectrum.mode_count_limit()) {
        rep.stabilized = true;  // full finite scan
    }
    rep.value = std::sqrt(2.0 * sup);
    rep.argmax_mode = argmax;
    rep.stabilized_at = scanned;
    if (!rep.stabilized) rep.note = "sup not stabilized within k_max";
    return rep;
}

inline ExpDecayResult decay_or_throw(const BernsteinSpec& f, double kappa) {
    auto res = exp_decay_integral_scaled(f, kappa);
    if (!res.finite()) throw std::runtime_error("exponential-decay integral diverges");
    return res;
}

}  // namespace detail

/// A_t = sqrt( 2 sup_k e^{-2 gamma_k t} int_0^infty e^{-F_{k,t}(r)} dr ).
/// Requires every mode to carry a subordination exponent.
inline BoundReport gradient_bound_A(const SpectrumSpec& spectrum, double t, size_t k_max = 2000) {
    auto term = [t](const Mode& m) {
        if (!m.symbol_f)
            throw std::invalid_argument("A_t: mode lacks a subordination Bernstein function");
        IntegratedExponent F(*m.symbol_f, m.gamma, t);
        auto res = exp_decay_integral(F);
        if (!res.finite()) throw std::runtime_error("divergent integral");
        return std::exp(-2.0 * m.gamma * t) * res.value;
    };
    auto envelope = [t](const Mode& m) {
        const double kappa = detail::decay_window(2.0 * m.gamma, t);
        auto res = exp_decay_integral_scaled(*m.symbol_f, kappa);
        if (!res.finite()) return std::numeric_limits<double>::infinity();
        return std::exp(-m.gamma * t) * res.value;
    };
    return detail::scan_sup(spectrum, t, k_max, BoundFormula::A_t, term, envelope);
}

/// C_t for subordinate drivers:
/// sqrt( 2 sup_k [ int e^{-t f_k} ^ e^{-gamma_k t} int e^{-(1-e^{-2 gamma_k t})/(2 gamma_k) f_k} ] ).
inline BoundReport coupling_bound_C_subordinate(const SpectrumSpec& spectrum, double t,
                                                size_t k_max = 2000) {
    auto branch2 = [t](const Mode& m) {
        const double kappa = detail::decay_window(2.0 * m.gamma, t);
        return std::exp(-m.gamma * t) * detail::decay_or_throw(*m.symbol_f, kappa).value;
    };
    auto term = [t, branch2](const Mode& m) {
        if (!m.symbol_f)
            throw std::invalid_argument("C_t: mode lacks a subordination Bernstein function");
        const double b1 = detail::decay_or_throw(*m.symbol_f, t).value;
        return std::min(b1, branch2(m));
    };
    return detail::scan_sup(spectrum, t, k_max, BoundFormula::C_t_subordinate, term, branch2);
}

/// C_t of the general lower-bound theorem, with the cos(1) factors (radians):
/// branch 1 uses (cos 1)/2 * t * f_k, branch 2 uses
/// (cos 1)(1 - e^{-2 gamma_k t})/(4 gamma_k) * f_k and the e^{-gamma_k t} prefactor.
inline BoundReport coupling_bound_C_general(const SpectrumSpec& spectrum, double t,
                                            size_t k_max = 2000) {
    const double cos1 = std::cos(1.0);
    auto branch2 = [t, cos1](const Mode& m) {
        const double kappa = 0.5 * cos1 * detail::decay_window(2.0 * m.gamma, t);
        return std::exp(-m.gamma * t) * detail::decay_or_throw(*m.dominating_f, kappa).value;
    };
    auto term = [t, cos1, branch2](const Mode& m) {
        if (!m.dominating_f)
            throw std::invalid_argument("C_t_general: mode lacks a dominating Bernstein function");
        const double b1 = detail::decay_or_throw(*m.dominating_f, 0.5 * cos1 * t).value;
        return std::min(b1, branch2(m));
    };
    return detail::scan_sup(spectrum, t, k_max, BoundFormula::C_t_general, term, branch2);
}

/// ||P_t(x,.) - P_t(y,.)||_var <= 2 C_t ||x - y||  (coefficient l2 norm).
inline double tv_upper_bound(const BoundReport& c_t, std::span<const double> x,
                             std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("tv_upper_bound: size mismatch");
    double ss = 0.0;
    for (size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i]) * (x[i] - y[i]);
    return 2.0 * c_t.value * std::sqrt(ss);
}

/// Explicit ergodicity bound assembled from the proof chain:
/// ||P_t(x,.) - mu||_var <= 2 C_t^alpha (2 ||x||^alpha + M),
/// M = S2^{alpha/2} + S_alpha.
inline double ergodicity_bound(const BoundReport& c_t, double s2, double s_alpha,
                               double x_norm, double alpha_m) {
    if (!(alpha_m > 0.0) || !(alpha_m <= 1.0))
        throw std::invalid_argument("ergodicity_bound: alpha_m must lie in (0,1]");
    if (!std::isfinite(s2) || !std::isfinite(s_alpha))
        throw std::invalid_argument("ergodicity_bound: moment series must be finite");
    if (!(x_norm >= 0.0)) throw std::invalid_argument("ergodicity_bound: negative norm");
    const double moment = std::pow(s2, alpha_m / 2.0) + s_alpha;
    return 2.0 * std::pow(c_t.value, alpha_m) * (2.0 * std::pow(x_norm, alpha_m) + moment);
}

}  // namespace cylou
