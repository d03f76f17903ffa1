#pragma once

// Scenario ingestion from JSON. Keys mirror the struct fields; a `_dbm` or
// `_db` suffix marks a logarithmic value that is converted to SI here and
// nowhere else. Unknown keys are rejected so typos do not pass silently.
//
//   {
//     "geometry": {"d10": 10, "kappa": 0.5, "alpha": 2, "ref_loss_db": 30},
//     "p0_dbm": 30, "bandwidth_hz": 1e6, "noise_psd_dbm_hz": -160,
//     "eta1": 0.5, "eta2": 0.5, "zeta1": 0.5, "zeta2": 0.5,
//     "weights": {"w1": 0.5, "w2": 0.5},
//     "solver": {"outer_tol": 1e-7},
//     "monte_carlo": {"trials": 1000, "seed": 1}
//   }

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>

#include "wpcn/dual.hpp"
#include "wpcn/scenario.hpp"

namespace wpcn {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    Scenario scenario = reference_scenario();
    Weights weights;
    SolverOptions solver;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    nlohmann::json source = nlohmann::json::object();
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                           const std::string& where)
{
    std::set<std::string> ok(known.begin(), known.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

inline double number(const nlohmann::json& obj, const std::string& key)
{
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
    return v.get<double>();
}

// Reads `key` (linear) or `key_suffix` (log scale); both at once is an error.
template <class Convert>
std::optional<double> linear_or_log(const nlohmann::json& obj, const std::string& key,
                                    const std::string& suffix, Convert convert)
{
    const bool lin = obj.contains(key);
    const bool log = obj.contains(key + suffix);
    if (lin && log) throw ConfigError("give either '" + key + "' or '" + key + suffix + "'");
    if (lin) return number(obj, key);
    if (log) return convert(number(obj, key + suffix));
    return std::nullopt;
}

inline std::optional<double> watts(const nlohmann::json& obj, const std::string& key)
{
    return linear_or_log(obj, key, "_dbm", dbm_to_watts);
}

} // namespace detail

inline RunConfig parse_config(const nlohmann::json& j)
{
    using detail::number;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    detail::reject_unknown(j,
                           {"geometry", "gains", "p0", "p0_dbm", "bandwidth_hz", "noise_psd_dbm_hz",
                            "sigma0_sq", "sigma0_sq_dbm", "sigma2_sq", "sigma2_sq_dbm", "eta1",
                            "eta2", "zeta1", "zeta2", "weights", "solver", "monte_carlo", "name"},
                           "config");
    RunConfig cfg;
    cfg.source = j;
    auto& sc = cfg.scenario;
    auto& p = sc.params;

    try {
        if (j.contains("geometry")) {
            const auto& g = j.at("geometry");
            detail::reject_unknown(g, {"d10", "kappa", "alpha", "ref_loss_db"}, "geometry");
            if (g.contains("d10")) sc.geometry.d10 = number(g, "d10");
            if (g.contains("kappa")) sc.geometry.kappa = number(g, "kappa");
            if (g.contains("alpha")) sc.geometry.alpha = number(g, "alpha");
            if (g.contains("ref_loss_db")) sc.geometry.ref_loss_db = number(g, "ref_loss_db");
        }
        if (j.contains("gains")) {
            const auto& g = j.at("gains");
            detail::reject_unknown(g, {"h10", "h20", "h12", "h10_db", "h20_db", "h12_db"}, "gains");
            auto gain = [&](const char* k) {
                const auto v = detail::linear_or_log(g, k, "_db", db_to_linear);
                if (!v) throw ConfigError(std::string("gains: missing '") + k + "'");
                return *v;
            };
            p.gains = {gain("h10"), gain("h20"), gain("h12")};
            sc.explicit_gains = true;
        }
        if (auto v = detail::watts(j, "p0")) p.p0 = *v;
        if (j.contains("bandwidth_hz")) p.bandwidth_hz = number(j, "bandwidth_hz");
        if (!(p.bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be positive");
        double psd_dbm_hz = -160.0;
        if (j.contains("noise_psd_dbm_hz")) psd_dbm_hz = number(j, "noise_psd_dbm_hz");
        const double from_psd = dbm_to_watts(psd_dbm_hz) * p.bandwidth_hz;
        p.sigma0_sq = detail::watts(j, "sigma0_sq").value_or(from_psd);
        p.sigma2_sq = detail::watts(j, "sigma2_sq").value_or(from_psd);
        const std::pair<const char*, double*> efficiencies[] = {
            {"eta1", &p.eta1}, {"eta2", &p.eta2}, {"zeta1", &p.zeta1}, {"zeta2", &p.zeta2}};
        for (const auto& [key, field] : efficiencies)
            if (j.contains(key)) *field = number(j, key);
        if (j.contains("weights")) {
            const auto& w = j.at("weights");
            detail::reject_unknown(w, {"w1", "w2"}, "weights");
            if (w.contains("w1")) cfg.weights.w1 = number(w, "w1");
            if (w.contains("w2")) cfg.weights.w2 = number(w, "w2");
        }
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            detail::reject_unknown(s,
                                   {"inner_tol", "outer_tol", "kkt_tol", "max_inner_iters",
                                    "max_outer_iters", "initial_ellipsoid_radius"},
                                   "solver");
            auto& o = cfg.solver;
            if (s.contains("inner_tol")) o.inner_tol = number(s, "inner_tol");
            if (s.contains("outer_tol")) o.outer_tol = number(s, "outer_tol");
            if (s.contains("kkt_tol")) o.kkt_tol = number(s, "kkt_tol");
            if (s.contains("max_inner_iters")) o.max_inner_iters = s.at("max_inner_iters").get<std::size_t>();
            if (s.contains("max_outer_iters")) o.max_outer_iters = s.at("max_outer_iters").get<std::size_t>();
            if (s.contains("initial_ellipsoid_radius"))
                o.initial_ellipsoid_radius = number(s, "initial_ellipsoid_radius");
        }
        if (j.contains("monte_carlo")) {
            const auto& m = j.at("monte_carlo");
            detail::reject_unknown(m, {"trials", "seed"}, "monte_carlo");
            if (m.contains("trials")) cfg.trials = m.at("trials").get<std::size_t>();
            if (m.contains("seed")) cfg.seed = m.at("seed").get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    try {
        if (!sc.explicit_gains) sc.geometry.validate();
        sc.resolve();
        cfg.solver.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (!(cfg.weights.w1 >= 0.0) || !(cfg.weights.w2 >= 0.0))
        throw ConfigError("weights must be non-negative");
    return cfg;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

} // namespace wpcn
