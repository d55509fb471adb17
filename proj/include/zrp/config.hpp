#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zrp/errors.hpp"
#include "zrp/grand_canonical.hpp"
#include "zrp/model.hpp"
#include "zrp/product_measure.hpp"
#include "zrp/test_function.hpp"

namespace zrp {

/// One structured configuration drives every experiment. kappa is derived
/// from theta (1 iff theta == 1) and cannot be set independently.
struct ExperimentConfig {
    // model
    int N = 100;
    double theta = 1.0;
    double alpha = 1.0, beta = 0.0, lambda = 0.0, delta = 1.0;
    std::string g_name = "linear";
    std::vector<double> g_table;
    std::string g_tail = "constant";
    double g_tail_slope = 0.0;
    std::optional<double> phi_star_override;
    unsigned k_probe = 256;

    // series machinery
    double series_tol = 1e-14;
    int max_terms = 100000;

    // run / experiment numerics
    double T = 1.0;
    int replicas = 100;
    double burn_in = 1.0;
    double eps = 0.05;
    std::vector<double> output_times;
    std::string initial = "stationary";  // or "constant"
    double initial_value = 0.5;
    std::vector<int> N_sweep;
    std::vector<int> K_sweep = {10, 20, 30};
    std::size_t state_cap = 5000;
    std::string test_function = "x(1-x)";
    std::uint64_t events = 10000000;
    int balance_configs = 10000;
    double chi2_level = 0.01;
    double domination_margin = 0.05;

    // pde
    int M = 400;
    double cfl = 0.9;
    std::vector<int> M_sweep = {100, 200, 400};

    // execution
    std::uint64_t seed = 20240801;
    std::string out_dir = "out";
    std::string format = "csv";
    unsigned threads = 0;

    int kappa() const { return theta == 1.0 ? 1 : 0; }

    RateFunction make_rate_function() const {
        if (g_name == "table") {
            auto tail = g_tail == "linear" ? RateFunction::TailRule::Linear
                                           : RateFunction::TailRule::Constant;
            return RateFunction::table(g_table, tail, g_tail_slope, phi_star_override, k_probe);
        }
        return RateFunction::from_name(g_name, k_probe, phi_star_override);
    }

    ModelParams make_params(int n_override = 0, bool diffusive = true) const {
        return ModelParams(n_override > 0 ? n_override : N, theta, alpha, make_rate_function(),
                           diffusive, beta, lambda, delta);
    }

    GrandCanonical make_gc() const {
        return GrandCanonical(make_rate_function(), series_tol, max_terms);
    }

    std::function<double(double)> initial_profile() const {
        if (initial == "constant") {
            double v = initial_value;
            return [v](double) { return v; };
        }
        throw ConfigError("initial profile '" + initial + "' is not a macroscopic profile");
    }

    ProductMeasureSampler make_initial_sampler(const GrandCanonical& gc, int n_override = 0) const {
        int n = n_override > 0 ? n_override : N;
        if (initial == "stationary")
            return ProductMeasureSampler::stationary(gc, make_params(n));
        return ProductMeasureSampler::slowly_varying(gc, n, initial_profile());
    }

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file " + path.string());
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }
};

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    auto get = [](const nlohmann::json& obj, const char* key, auto& out) {
        if (obj.contains(key)) out = obj.at(key).get<std::decay_t<decltype(out)>>();
    };

    if (j.contains("model")) {
        const auto& m = j.at("model");
        get(m, "N", c.N);
        get(m, "theta", c.theta);
        get(m, "alpha", c.alpha);
        get(m, "beta", c.beta);
        get(m, "lambda", c.lambda);
        get(m, "delta", c.delta);
        get(m, "k_probe", c.k_probe);
        if (m.contains("kappa"))
            throw ConfigError("kappa is derived from theta and cannot be set");
        if (m.contains("phi_star") && !m.at("phi_star").is_null())
            c.phi_star_override = m.at("phi_star").get<double>();
        if (m.contains("g")) {
            const auto& g = m.at("g");
            if (g.is_string()) {
                c.g_name = g.get<std::string>();
            } else {
                c.g_name = g.at("family").get<std::string>();
                if (c.g_name == "capped") {
                    c.g_name = "capped(" + std::to_string(g.at("cap").get<double>()) + ")";
                } else if (c.g_name == "table") {
                    c.g_table = g.at("values").get<std::vector<double>>();
                    get(g, "tail", c.g_tail);
                    get(g, "tail_slope", c.g_tail_slope);
                    if (g.contains("phi_star") && !g.at("phi_star").is_null())
                        c.phi_star_override = g.at("phi_star").get<double>();
                }
            }
        }
        if (!(c.theta >= 1.0)) throw ConfigError("theta must be >= 1 (theta < 1 unsupported)");
    }
    if (j.contains("series")) {
        get(j.at("series"), "tol", c.series_tol);
        get(j.at("series"), "max_terms", c.max_terms);
    }
    if (j.contains("run")) {
        const auto& r = j.at("run");
        get(r, "T", c.T);
        get(r, "replicas", c.replicas);
        get(r, "burn_in", c.burn_in);
        get(r, "eps", c.eps);
        get(r, "output_times", c.output_times);
        if (r.contains("output_grid")) {
            const auto& g = r.at("output_grid");
            double t0 = g.at("t0").get<double>(), t1 = g.at("t1").get<double>();
            int n = g.at("n").get<int>();
            if (n < 2 || t1 <= t0) throw ConfigError("output_grid needs n >= 2 and t1 > t0");
            c.output_times.clear();
            for (int i = 0; i < n; ++i)
                c.output_times.push_back(t0 + (t1 - t0) * i / (n - 1));
        }
        if (r.contains("initial")) {
            const auto& ini = r.at("initial");
            if (ini.is_string()) {
                c.initial = ini.get<std::string>();
            } else {
                c.initial = ini.at("profile").get<std::string>();
                get(ini, "value", c.initial_value);
            }
        }
        get(r, "N_sweep", c.N_sweep);
        get(r, "K_sweep", c.K_sweep);
        get(r, "state_cap", c.state_cap);
        get(r, "test_function", c.test_function);
        get(r, "events", c.events);
        get(r, "balance_configs", c.balance_configs);
        get(r, "chi2_level", c.chi2_level);
        get(r, "domination_margin", c.domination_margin);
    }
    if (j.contains("pde")) {
        get(j.at("pde"), "M", c.M);
        get(j.at("pde"), "cfl", c.cfl);
        get(j.at("pde"), "M_sweep", c.M_sweep);
    }
    get(j, "seed", c.seed);
    get(j, "out_dir", c.out_dir);
    get(j, "format", c.format);
    get(j, "threads", c.threads);
    if (c.format != "csv" && c.format != "json")
        throw ConfigError("format must be csv or json");
    return c;
}

} // namespace zrp
