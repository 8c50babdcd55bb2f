// Bernstein functions: a small closed catalogue (stable, relativistic,
// logarithmic) plus combinators, with pointwise evaluation, JSON round-trip,
// a finite-difference complete-monotonicity test and a growth heuristic.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cylou {

/// Symbolic description of a Bernstein function f with f(0) = 0.
///
/// Catalogue:
///   stable(a, c)        f(r) = c * r^a,            a in (0,1], c > 0
///   relativistic(a, m)  f(r) = (r + m^(1/a))^a - m, a in (0,1), m > 0
///   logarithmic(b)      f(r) = log(1 + r/b),        b > 0
/// Combinators: scaled (argument dilation), time_scaled (value scaling), sum.
/// Malformed parameters are rejected at construction; evaluation never throws.
class BernsteinSpec {
public:
    enum class Kind { stable, relativistic, logarithmic, scaled, sum, time_scaled };

    static BernsteinSpec stable(double a, double c) {
        if (!(a > 0.0) || !(a <= 1.0)) throw std::invalid_argument("stable: exponent a must lie in (0,1]");
        if (!(c > 0.0)) throw std::invalid_argument("stable: scale c must be positive");
        BernsteinSpec s(Kind::stable);
        s.p1_ = a;
        s.p2_ = c;
        return s;
    }

    static BernsteinSpec relativistic(double a, double m) {
        if (!(a > 0.0) || !(a < 1.0)) throw std::invalid_argument("relativistic: exponent a must lie in (0,1)");
        if (!(m > 0.0)) throw std::invalid_argument("relativistic: mass m must be positive");
        BernsteinSpec s(Kind::relativistic);
        s.p1_ = a;
        s.p2_ = m;
        return s;
    }

    static BernsteinSpec logarithmic(double b) {
        if (!(b > 0.0)) throw std::invalid_argument("logarithmic: parameter b must be positive");
        BernsteinSpec s(Kind::logarithmic);
        s.p1_ = b;
        return s;
    }

    static BernsteinSpec scaled(BernsteinSpec inner, double lambda) {
        if (!(lambda > 0.0)) throw std::invalid_argument("scaled: lambda must be positive");
        BernsteinSpec s(Kind::scaled);
        s.p1_ = lambda;
        s.children_.push_back(std::move(inner));
        return s;
    }

    static BernsteinSpec sum(std::vector<BernsteinSpec> terms) {
        if (terms.empty()) throw std::invalid_argument("sum: needs at least one term");
        BernsteinSpec s(Kind::sum);
        s.children_ = std::move(terms);
        return s;
    }

    static BernsteinSpec time_scaled(BernsteinSpec inner, double kappa) {
        if (!(kappa > 0.0)) throw std::invalid_argument("time_scaled: kappa must be positive");
        BernsteinSpec s(Kind::time_scaled);
        s.p1_ = kappa;
        s.children_.push_back(std::move(inner));
        return s;
    }

    double operator()(double r) const {
        if (!(r >= 0.0)) throw std::invalid_argument("BernsteinSpec: argument must be nonnegative");
        switch (kind_) {
            case Kind::stable:
                return p2_ * std::pow(r, p1_);
            case Kind::relativistic: {
                // (r + m^(1/a))^a - m written via expm1/log1p so f(0) is exactly 0
                const double big_m = std::pow(p2_, 1.0 / p1_);
                return p2_ * std::expm1(p1_ * std::log1p(r / big_m));
            }
            case Kind::logarithmic:
                return std::log1p(r / p1_);
            case Kind::scaled:
                return children_[0](p1_ * r);
            case Kind::sum: {
                double acc = 0.0;
                for (const auto& t : children_) acc += t(r);
                return acc;
            }
            case Kind::time_scaled:
                return p1_ * children_[0](r);
        }
        return 0.0;  // unreachable
    }

    Kind kind() const { return kind_; }
    double param1() const { return p1_; }
    double param2() const { return p2_; }
    const std::vector<BernsteinSpec>& children() const { return children_; }

    /// If the whole tree is equivalent to c * r^a, returns (a, c).  This is
    /// what unlocks the closed forms downstream (integrated exponents and the
    /// exponential-decay integrals of pure power laws).
    std::optional<std::pair<double, double>> as_stable() const {
        switch (kind_) {
            case Kind::stable:
                return std::make_pair(p1_, p2_);
            case Kind::scaled: {
                auto in = children_[0].as_stable();
                if (!in) return std::nullopt;
                return std::make_pair(in->first, in->second * std::pow(p1_, in->first));
            }
            case Kind::time_scaled: {
                auto in = children_[0].as_stable();
                if (!in) return std::nullopt;
                return std::make_pair(in->first, p1_ * in->second);
            }
            case Kind::sum: {
                if (children_.size() == 1) return children_[0].as_stable();
                return std::nullopt;
            }
            default:
                return std::nullopt;
        }
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        switch (kind_) {
            case Kind::stable:
                j["kind"] = "stable";
                j["a"] = p1_;
                j["c"] = p2_;
                break;
            case Kind::relativistic:
                j["kind"] = "relativistic";
                j["a"] = p1_;
                j["m"] = p2_;
                break;
            case Kind::logarithmic:
                j["kind"] = "log";
                j["b"] = p1_;
                break;
            case Kind::scaled:
                j["kind"] = "scaled";
                j["inner"] = children_[0].to_json();
                j["lambda"] = p1_;
                break;
            case Kind::sum: {
                j["kind"] = "sum";
                auto arr = nlohmann::ordered_json::array();
                for (const auto& t : children_) arr.push_back(t.to_json());
                j["terms"] = std::move(arr);
                break;
            }
            case Kind::time_scaled:
                j["kind"] = "time_scaled";
                j["inner"] = children_[0].to_json();
                j["kappa"] = p1_;
                break;
        }
        return j;
    }

    static BernsteinSpec from_json(const nlohmann::json& j) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "stable") return stable(j.at("a").get<double>(), j.at("c").get<double>());
        if (kind == "relativistic") return relativistic(j.at("a").get<double>(), j.at("m").get<double>());
        if (kind == "log") return logarithmic(j.at("b").get<double>());
        if (kind == "scaled") return scaled(from_json(j.at("inner")), j.at("lambda").get<double>());
        if (kind == "time_scaled") return time_scaled(from_json(j.at("inner")), j.at("kappa").get<double>());
        if (kind == "sum") {
            std::vector<BernsteinSpec> terms;
            for (const auto& t : j.at("terms")) terms.push_back(from_json(t));
            return sum(std::move(terms));
        }
        throw std::invalid_argument("BernsteinSpec: unknown kind '" + kind + "'");
    }

private:
    explicit BernsteinSpec(Kind k) : kind_(k) {}

    Kind kind_;
    double p1_ = 0.0;
    double p2_ = 0.0;
    std::vector<BernsteinSpec> children_;
};

// ---------------------------------------------------------------------------
// Complete monotonicity via finite differences
// ---------------------------------------------------------------------------

struct MonotonicityReport {
    enum class Verdict { pass, fail, inconclusive };
    Verdict verdict = Verdict::pass;
    int order = 0;          // difference order of the first violation
    size_t index = 0;       // grid index of the first violation
    double magnitude = 0.0; // size of the violation past the slack
    std::string note;

    bool passed() const { return verdict == Verdict::pass; }
};

/// Checks the alternating-sign pattern of forward differences on a uniform
/// grid: order-k differences of a Bernstein function must have sign (-1)^(k+1)
/// for k >= 1.  A violation that disappears when the grid stride is doubled is
/// reported as inconclusive (grid too coarse / float noise), not as a failure.
inline MonotonicityReport check_complete_monotonicity(
    const std::function<double(double)>& f, std::span<const double> grid,
    int max_order, double rel_slack = 1e4) {
    MonotonicityReport rep;
    if (grid.size() < static_cast<size_t>(max_order) + 1)
        throw std::invalid_argument("check_complete_monotonicity: grid shorter than order+1");
    if (max_order < 2)
        throw std::invalid_argument("check_complete_monotonicity: order must be >= 2");

    const double step = grid[1] - grid[0];
    for (size_t i = 1; i + 1 < grid.size(); ++i) {
        const double h = grid[i + 1] - grid[i];
        if (std::fabs(h - step) > 1e-9 * std::max(1.0, std::fabs(step)))
            throw std::invalid_argument("check_complete_monotonicity: grid must be uniform");
    }

    std::vector<double> values(grid.size());
    double fmax = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        values[i] = f(grid[i]);
        fmax = std::max(fmax, std::fabs(values[i]));
    }

    auto first_violation = [&](const std::vector<double>& v0, int stride_pow)
        -> std::optional<std::tuple<int, size_t, double>> {
        std::vector<double> diff;
        const size_t stride = size_t{1} << stride_pow;
        // subsample for the stride-doubled cross-check
        std::vector<double> d;
        for (size_t i = 0; i < v0.size(); i += stride) d.push_back(v0[i]);
        double binom_scale = 1.0;
        for (int k = 1; k <= max_order; ++k) {
            binom_scale *= 2.0;
            if (d.size() < 2) break;
            diff.resize(d.size() - 1);
            for (size_t i = 0; i + 1 < d.size(); ++i) diff[i] = d[i + 1] - d[i];
            d = diff;
            const double want_sign = (k % 2 == 1) ? +1.0 : -1.0;
            const double slack = rel_slack * binom_scale * 2.2e-16 * std::max(fmax, 1e-300);
            for (size_t i = 0; i < d.size(); ++i) {
                if (want_sign * d[i] < -slack)
                    return std::make_tuple(k, i * stride, -want_sign * d[i] - slack);
            }
        }
        return std::nullopt;
    };

    auto v1 = first_violation(values, 0);
    if (!v1) return rep;

    auto v2 = first_violation(values, 1);
    if (!v2) {
        rep.verdict = MonotonicityReport::Verdict::inconclusive;
        rep.order = std::get<0>(*v1);
        rep.index = std::get<1>(*v1);
        rep.magnitude = std::get<2>(*v1);
        rep.note = "violation at base spacing vanishes at doubled spacing";
        return rep;
    }

    rep.verdict = MonotonicityReport::Verdict::fail;
    rep.order = std::get<0>(*v1);
    rep.index = std::get<1>(*v1);
    rep.magnitude = std::get<2>(*v1);
    return rep;
}

inline std::vector<double> uniform_grid(double lo, double hi, size_t count) {
    if (count < 2 || !(hi > lo)) throw std::invalid_argument("uniform_grid: bad range");
    std::vector<double> g(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (size_t i = 0; i < count; ++i) g[i] = lo + step * static_cast<double>(i);
    return g;
}

inline std::vector<double> geometric_grid(double lo, double hi, size_t count) {
    if (count < 2 || !(hi > lo) || !(lo > 0.0))
        throw std::invalid_argument("geometric_grid: bad range");
    std::vector<double> g(count);
    const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
    for (size_t i = 0; i < count; ++i) g[i] = lo * std::exp(ratio * static_cast<double>(i));
    return g;
}

// ---------------------------------------------------------------------------
// Growth heuristic: f(r) / log(1+r) -> infinity?
// ---------------------------------------------------------------------------

struct SuperlogReport {
    enum class Verdict { satisfied, violated, inconclusive };
    Verdict verdict = Verdict::inconclusive;
    double last_ratio = 0.0;
    double last_growth = 0.0;  // ratio gain per decade near the end of the probe
    std::string note;
};

/// Probes f(R)/log(1+R) along a geometric grid.  This is a heuristic for a
/// limit condition and says so: `satisfied` when the ratio keeps growing and
/// clears the threshold at the last probe, `violated` when it has flattened
/// below it, `inconclusive` otherwise.
inline SuperlogReport superlog_growth_check(const std::function<double(double)>& f,
                                            std::span<const double> probe_grid,
                                            double threshold = 10.0) {
    if (probe_grid.size() < 9)
        throw std::invalid_argument("superlog_growth_check: probe grid must span >= 8 decades");
    SuperlogReport rep;
    std::vector<double> ratio(probe_grid.size());
    for (size_t i = 0; i < probe_grid.size(); ++i) {
        const double r = probe_grid[i];
        if (!(r > 0.0)) throw std::invalid_argument("superlog_growth_check: probes must be positive");
        ratio[i] = f(r) / std::log1p(r);
    }
    rep.last_ratio = ratio.back();
    const size_t n = ratio.size();
    // average multiplicative gain over the last three probe intervals,
    // normalized per decade of r
    const double decades = std::log10(probe_grid[n - 1] / probe_grid[n - 4]);
    rep.last_growth = std::pow(ratio[n - 1] / ratio[n - 4], 1.0 / std::max(decades, 1e-9));

    const bool growing = rep.last_growth > 1.05;
    const bool flat = rep.last_growth < 1.01;
    if (ratio.back() >= threshold && growing) {
        rep.verdict = SuperlogReport::Verdict::satisfied;
    } else if (flat) {
        rep.verdict = SuperlogReport::Verdict::violated;
        rep.note = "ratio flattened below threshold";
    } else {
        rep.verdict = SuperlogReport::Verdict::inconclusive;
        rep.note = "ratio neither clearly growing nor flat over the probe range";
    }
    return rep;
}

inline SuperlogReport superlog_growth_check(const BernsteinSpec& f,
                                            double r_lo = 1.0, double r_hi = 1e9,
                                            size_t probes = 37, double threshold = 10.0) {
    auto grid = geometric_grid(r_lo, r_hi, probes);
    return superlog_growth_check([&f](double r) { return f(r); }, grid, threshold);
}

}  // namespace cylou
