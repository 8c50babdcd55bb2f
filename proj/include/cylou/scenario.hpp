// Scenario configuration: one JSON document describing the spectrum, the time
// grid, initial coefficients, Monte Carlo sizes and tolerances.  Parse errors
// carry the offending field path.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cylou/spectrum.hpp"

namespace cylou {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct Tolerances {
    double criterion_tol = 1e-3;  // tail-estimate gate for finite verdicts
    double sweep_tol = 0.5;       // verdict-grade gate used by the phase sweep
    double bound_slack = 1e-7;    // numerical slack when checking quantity <= bound
};

struct ScenarioConfig {
    SpectrumSpec spectrum = SpectrumSpec::heat_equation(1, 1.0, 0.0, 1.0);
    std::vector<double> t_grid = {1.0};
    std::map<size_t, double> x0;  // sparse, 1-based enumeration index -> value
    std::map<size_t, double> y0;
    double alpha_m = 0.5;
    size_t truncation_n = 64;
    size_t mc_replicates = 10000;
    size_t modes_max = 10000;  // modes enumerated by the series criteria
    uint64_t master_seed = 0x5EEDBA5EBA11ull;
    Tolerances tolerances;
    // sweep grids (only the `sweep` experiment reads these)
    std::vector<int> sweep_d = {1, 2, 3};
    std::vector<double> sweep_alpha = {0.5, 1.0, 1.5};
    std::vector<double> sweep_beta = {-2.0, -1.0, 0.0, 1.0};

    void validate() const {
        if (t_grid.empty()) throw ConfigError("t_grid: must not be empty");
        double prev = 0.0;
        for (double t : t_grid) {
            if (!(t > prev)) throw ConfigError("t_grid: must be strictly increasing and positive");
            prev = t;
        }
        for (const auto& [k, v] : x0)
            if (k == 0 || k > truncation_n) throw ConfigError("x0: index outside truncation");
        for (const auto& [k, v] : y0)
            if (k == 0 || k > truncation_n) throw ConfigError("y0: index outside truncation");
        if (!(alpha_m > 0.0) || !(alpha_m <= 1.0))
            throw ConfigError("alpha_m: must lie in (0,1]");
        if (truncation_n == 0) throw ConfigError("truncation_N: must be positive");
        if (!(tolerances.criterion_tol > 0.0)) throw ConfigError("tolerances.criterion_tol: must be positive");
        if (!(tolerances.sweep_tol > 0.0)) throw ConfigError("tolerances.sweep_tol: must be positive");
        if (!(tolerances.bound_slack > 0.0)) throw ConfigError("tolerances.bound_slack: must be positive");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["spectrum"] = spectrum.to_json();
        j["t_grid"] = t_grid;
        auto dump_sparse = [](const std::map<size_t, double>& m) {
            nlohmann::ordered_json o = nlohmann::ordered_json::object();
            for (const auto& [k, v] : m) o[std::to_string(k)] = v;
            return o;
        };
        j["x0"] = dump_sparse(x0);
        j["y0"] = dump_sparse(y0);
        j["alpha_m"] = alpha_m;
        j["truncation_N"] = truncation_n;
        j["mc_replicates"] = mc_replicates;
        j["modes_max"] = modes_max;
        j["master_seed"] = master_seed;
        j["tolerances"] = {{"criterion_tol", tolerances.criterion_tol},
                           {"sweep_tol", tolerances.sweep_tol},
                           {"bound_slack", tolerances.bound_slack}};
        j["sweep"] = {{"d", sweep_d}, {"alpha", sweep_alpha}, {"beta", sweep_beta}};
        return j;
    }

    static ScenarioConfig from_json(const nlohmann::json& j) {
        ScenarioConfig c;
        auto fail = [](const std::string& field, const std::string& why) -> ConfigError {
            return ConfigError(field + ": " + why);
        };
        try {
            if (!j.contains("spectrum")) throw fail("spectrum", "missing");
            c.spectrum = SpectrumSpec::from_json(j.at("spectrum"));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw fail("spectrum", e.what());
        }
        auto read_sparse = [&](const char* name, std::map<size_t, double>& out) {
            if (!j.contains(name)) return;
            if (!j.at(name).is_object()) throw fail(name, "must be an object of index -> value");
            for (const auto& [k, v] : j.at(name).items()) {
                size_t idx = 0;
                try {
                    idx = std::stoull(k);
                } catch (...) {
                    throw fail(std::string(name) + "." + k, "key must be a positive integer");
                }
                if (!v.is_number()) throw fail(std::string(name) + "." + k, "value must be a number");
                out[idx] = v.get<double>();
            }
        };
        try {
            if (j.contains("t_grid")) c.t_grid = j.at("t_grid").get<std::vector<double>>();
        } catch (const std::exception& e) {
            throw fail("t_grid", e.what());
        }
        read_sparse("x0", c.x0);
        read_sparse("y0", c.y0);
        auto num = [&](const char* name, auto& target) {
            if (!j.contains(name)) return;
            try {
                target = j.at(name).get<std::decay_t<decltype(target)>>();
            } catch (const std::exception& e) {
                throw fail(name, e.what());
            }
        };
        num("alpha_m", c.alpha_m);
        num("truncation_N", c.truncation_n);
        num("mc_replicates", c.mc_replicates);
        num("modes_max", c.modes_max);
        num("master_seed", c.master_seed);
        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            if (t.contains("criterion_tol")) c.tolerances.criterion_tol = t.at("criterion_tol").get<double>();
            if (t.contains("sweep_tol")) c.tolerances.sweep_tol = t.at("sweep_tol").get<double>();
            if (t.contains("bound_slack")) c.tolerances.bound_slack = t.at("bound_slack").get<double>();
        }
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            try {
                if (s.contains("d")) c.sweep_d = s.at("d").get<std::vector<int>>();
                if (s.contains("alpha")) c.sweep_alpha = s.at("alpha").get<std::vector<double>>();
                if (s.contains("beta")) c.sweep_beta = s.at("beta").get<std::vector<double>>();
            } catch (const std::exception& e) {
                throw fail("sweep", e.what());
            }
        }
        c.validate();
        return c;
    }

    uint64_t hash() const {
        const std::string dump = to_json().dump();
        uint64_t h = 0xCBF29CE484222325ull;
        for (unsigned char ch : dump) {
            h ^= ch;
            h *= 0x100000001B3ull;
        }
        return h;
    }
};

}  // namespace cylou
