// Mode families of the diagonal generator: eigenvalues gamma_n, weights and
// per-mode noise descriptions, with a deterministic enumeration order.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cylou/bernstein.hpp"
#include "cylou/levy_measure.hpp"

namespace cylou {

/// Lattice enumeration for the Dirichlet Laplacian on [0,pi]^d: multi-indices
/// n in N^d with gamma_n = |n|^2, sorted by (gamma, lexicographic n).  Returns
/// exactly the N smallest keys.
inline std::vector<std::pair<std::vector<int>, double>> enumerate_modes(int d, size_t N) {
    if (d < 1 || d > 8) throw std::invalid_argument("enumerate_modes: d must lie in [1,8]");
    if (N == 0) return {};

    // radius guess from the volume of the positive orthant, then grow until
    // at least N lattice points fit
    double bound = std::max(4.0 * std::pow(static_cast<double>(N), 2.0 / d), 16.0);
    std::vector<std::pair<std::vector<int>, double>> modes;
    while (true) {
        modes.clear();
        std::vector<int> idx(static_cast<size_t>(d), 1);
        // odometer over the box [1, floor(sqrt(bound))]^d, keep |n|^2 <= bound
        const int side = static_cast<int>(std::floor(std::sqrt(bound)));
        if (side >= 1) {
            while (true) {
                long g = 0;
                for (int v : idx) g += static_cast<long>(v) * v;
                if (static_cast<double>(g) <= bound)
                    modes.emplace_back(idx, static_cast<double>(g));
                int pos = d - 1;
                while (pos >= 0) {
                    if (++idx[static_cast<size_t>(pos)] <= side) break;
                    idx[static_cast<size_t>(pos)] = 1;
                    --pos;
                }
                if (pos < 0) break;
            }
        }
        if (modes.size() >= N) break;
        bound *= 2.0;
    }
    std::sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    modes.resize(N);
    return modes;
}

/// One enumerated mode: eigenvalue, weight, noise description and (when
/// available) the Bernstein functions attached to it.  `symbol_f` is the
/// subordination exponent (the mode is a subordinate Brownian motion with
/// symbol symbol_f(h^2)); `dominating_f` satisfies
/// nu(dz) >= |z|^{-1} dominating_f(z^{-2}) dz with equality for the catalogue.
struct Mode {
    std::vector<int> n;
    double gamma = 0.0;
    double weight = 1.0;
    LevyMeasureSpec measure;
    std::optional<BernsteinSpec> symbol_f;
    std::optional<BernsteinSpec> dominating_f;
};

class SpectrumSpec {
public:
    enum class Kind { heat_equation, explicit_list };

    struct ExplicitMode {
        double gamma;
        std::optional<LevyMeasureSpec> measure;
        std::optional<BernsteinSpec> bernstein;
    };

    /// Heat-equation family on [0,pi]^d: gamma_n = |n|^2, mode noise
    /// |n|^beta Z^n with Z^n i.i.d. symmetric alpha-stable of Levy density
    /// K |z|^{-1-alpha}; the weight enters the measure as an image, i.e. the
    /// mode measure is stable_sym(alpha, K |n|^{alpha beta}).
    static SpectrumSpec heat_equation(int d, double alpha, double beta, double intensity) {
        if (d < 1 || d > 8) throw std::invalid_argument("heat_equation: d must lie in [1,8]");
        if (!(alpha > 0.0) || !(alpha < 2.0))
            throw std::invalid_argument("heat_equation: alpha must lie in (0,2)");
        if (!std::isfinite(beta)) throw std::invalid_argument("heat_equation: beta must be finite");
        if (!(intensity > 0.0)) throw std::invalid_argument("heat_equation: intensity must be positive");
        SpectrumSpec s(Kind::heat_equation);
        s.d_ = d;
        s.alpha_ = alpha;
        s.beta_ = beta;
        s.intensity_ = intensity;
        return s;
    }

    static SpectrumSpec explicit_modes(std::vector<ExplicitMode> modes) {
        if (modes.empty()) throw std::invalid_argument("explicit_modes: empty mode list");
        for (const auto& m : modes) {
            if (!(m.gamma > 0.0)) throw std::invalid_argument("explicit_modes: gamma must be positive");
            if (!m.measure && !m.bernstein)
                throw std::invalid_argument("explicit_modes: mode needs a measure or a Bernstein function");
        }
        SpectrumSpec s(Kind::explicit_list);
        s.explicit_ = std::move(modes);
        // deterministic order: by (gamma, original position)
        std::stable_sort(s.explicit_.begin(), s.explicit_.end(),
                         [](const ExplicitMode& a, const ExplicitMode& b) { return a.gamma < b.gamma; });
        return s;
    }

    Kind kind() const { return kind_; }
    int dimension() const { return d_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double intensity() const { return intensity_; }

    bool infinite() const { return kind_ == Kind::heat_equation; }

    size_t mode_count_limit() const {
        return kind_ == Kind::explicit_list ? explicit_.size()
                                            : std::numeric_limits<size_t>::max();
    }

    /// First N modes in enumeration order (clipped to the list size for
    /// explicit spectra).
    std::vector<Mode> enumerate(size_t N) const {
        std::vector<Mode> out;
        if (kind_ == Kind::heat_equation) {
            auto lattice = enumerate_modes(d_, N);
            out.reserve(lattice.size());
            for (auto& [n, gamma] : lattice) {
                double norm = std::sqrt(gamma);
                double w = std::pow(norm, beta_);
                double k_eff = intensity_ * std::pow(w, alpha_);
                Mode m{std::move(n), gamma, w, LevyMeasureSpec::stable_sym(alpha_, k_eff),
                       std::nullopt, std::nullopt};
                m.dominating_f = BernsteinSpec::stable(alpha_ / 2.0, k_eff);
                m.symbol_f = BernsteinSpec::stable(alpha_ / 2.0,
                                                   stable_symbol_constant(alpha_) * k_eff);
                out.push_back(std::move(m));
            }
            return out;
        }
        const size_t count = std::min(N, explicit_.size());
        out.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            const auto& em = explicit_[i];
            if (em.measure) {
                Mode m{{static_cast<int>(i + 1)}, em.gamma, 1.0, *em.measure, std::nullopt,
                       std::nullopt};
                if (em.measure->kind() == LevyMeasureSpec::Kind::stable_sym) {
                    const double a = em.measure->alpha();
                    const double k = em.measure->intensity();
                    m.dominating_f = BernsteinSpec::stable(a / 2.0, k);
                    m.symbol_f = BernsteinSpec::stable(a / 2.0, stable_symbol_constant(a) * k);
                } else if (em.measure->kind() == LevyMeasureSpec::Kind::bernstein_lower) {
                    m.dominating_f = *em.measure->bernstein();
                }
                out.push_back(std::move(m));
            } else {
                // subordinate-Brownian mode: the criteria act on the canonical
                // dominated part |z|^{-1} f(z^{-2}) dz
                Mode m{{static_cast<int>(i + 1)}, em.gamma, 1.0,
                       LevyMeasureSpec::bernstein_lower(*em.bernstein), *em.bernstein,
                       *em.bernstein};
                out.push_back(std::move(m));
            }
        }
        return out;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        if (kind_ == Kind::heat_equation) {
            j["kind"] = "heat_equation";
            j["d"] = d_;
            j["alpha"] = alpha_;
            j["beta"] = beta_;
            j["intensity"] = intensity_;
            return j;
        }
        j["kind"] = "explicit";
        auto arr = nlohmann::ordered_json::array();
        for (const auto& em : explicit_) {
            nlohmann::ordered_json e;
            e["gamma"] = em.gamma;
            if (em.measure) e["measure"] = em.measure->to_json();
            if (em.bernstein) e["bernstein"] = em.bernstein->to_json();
            arr.push_back(std::move(e));
        }
        j["modes"] = std::move(arr);
        return j;
    }

    static SpectrumSpec from_json(const nlohmann::json& j) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "heat_equation")
            return heat_equation(j.at("d").get<int>(), j.at("alpha").get<double>(),
                                 j.at("beta").get<double>(), j.at("intensity").get<double>());
        if (kind == "explicit") {
            std::vector<ExplicitMode> modes;
            for (const auto& e : j.at("modes")) {
                ExplicitMode em;
                em.gamma = e.at("gamma").get<double>();
                if (e.contains("measure")) em.measure = LevyMeasureSpec::from_json(e.at("measure"));
                if (e.contains("bernstein"))
                    em.bernstein = BernsteinSpec::from_json(e.at("bernstein"));
                modes.push_back(std::move(em));
            }
            return explicit_modes(std::move(modes));
        }
        throw std::invalid_argument("SpectrumSpec: unknown kind '" + kind + "'");
    }

private:
    explicit SpectrumSpec(Kind k) : kind_(k) {}

    Kind kind_;
    int d_ = 1;
    double alpha_ = 1.0;
    double beta_ = 0.0;
    double intensity_ = 1.0;
    std::vector<ExplicitMode> explicit_;
};

}  // namespace cylou
