#pragma once

// Experiment configuration: one JSON document, no includes, every seed
// explicit. Parsing materializes all defaults so the canonical echo (and
// therefore the config hash) is independent of which fields were spelled
// out in the input file.

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyadic_tb/accretive_system.hpp"
#include "dyadic_tb/cz_kernel.hpp"
#include "dyadic_tb/grid.hpp"
#include "dyadic_tb/report.hpp"
#include "dyadic_tb/stopping_time.hpp"

namespace dytb {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct TestFunctionSpec {
    int count = 4;
    std::vector<std::string> kinds{"pm1", "bounded", "extremal"};
};

struct VerificationSpec {
    std::vector<int> q1_generations{0, 1};
    std::string q2_per_q1 = "self+children";  // or "self"
    TestFunctionSpec test_functions;
    int random_trials = 8;
    int sweep_max_generation = 4;
    int coifman_meyer_samples = 4;
    std::set<std::string> groups;  // empty = all
    bool enabled(const std::string& g) const { return groups.empty() || groups.count(g) > 0; }
};

struct ExperimentConfig {
    GridSpec grid{1, 5};
    std::vector<KernelSpec> kernels{KernelSpec{}};  // first entry drives verify
    SystemSpec sys1{};
    SystemSpec sys2{};
    StoppingParams stopping{};
    VerificationSpec verification{};
    double tolerance_identity = 1e-10;
    double tolerance_scale = 1.0;
    std::uint64_t seed = 1;
    QuadratureRule quadrature = QuadratureRule::Midpoint;

    // sweep description (used only by the sweep subcommand)
    std::string sweep_parameter;
    std::vector<double> sweep_values;

    const KernelSpec& kernel() const { return kernels.front(); }
};

namespace detail {

inline void require_known_keys(const nlohmann::json& j, const std::string& where,
                               std::initializer_list<const char*> known) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

inline KernelSpec parse_kernel(const nlohmann::json& j) {
    require_known_keys(j, "kernel", {"name", "tau", "rho", "component", "seed", "scales"});
    KernelSpec k;
    k.name = j.value("name", k.name);
    k.tau = j.value("tau", k.tau);
    k.rho = j.value("rho", k.rho);
    k.component = j.value("component", k.component);
    k.seed = j.value("seed", k.seed);
    k.scales = j.value("scales", k.scales);
    return k;
}

inline SystemSpec parse_system(const nlohmann::json& j) {
    require_known_keys(j, "system", {"kind", "seed", "amplitude", "q", "theta_max", "values"});
    SystemSpec s;
    s.kind = j.value("kind", s.kind);
    s.seed = j.value("seed", s.seed);
    s.amplitude = j.value("amplitude", s.amplitude);
    s.q = j.value("q", s.q);
    s.theta_max = j.value("theta_max", s.theta_max);
    if (j.contains("values"))
        for (auto it = j.at("values").begin(); it != j.at("values").end(); ++it)
            s.file_values[it.key()] =
                it.value().get<std::vector<std::array<double, 2>>>();
    return s;
}

inline nlohmann::json kernel_to_json(const KernelSpec& k) {
    nlohmann::json j;
    j["name"] = k.name;
    j["tau"] = k.tau;
    j["rho"] = k.rho;
    j["component"] = k.component;
    j["seed"] = k.seed;
    j["scales"] = k.scales;
    return j;
}

inline nlohmann::json system_to_json(const SystemSpec& s) {
    nlohmann::json j;
    j["kind"] = s.kind;
    j["seed"] = s.seed;
    j["amplitude"] = s.amplitude;
    j["q"] = s.q;
    j["theta_max"] = s.theta_max;
    if (!s.file_values.empty()) {
        nlohmann::json values;
        for (const auto& [k, v] : s.file_values) values[k] = v;
        j["values"] = std::move(values);
    }
    return j;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    try {
        detail::require_known_keys(j, "config",
                                   {"grid", "kernel", "kernels", "systems", "stopping",
                                    "verification", "tolerances", "seed", "quadrature", "sweep"});
        ExperimentConfig c;
        if (j.contains("grid")) {
            detail::require_known_keys(j.at("grid"), "grid", {"n", "L"});
            c.grid = GridSpec(j.at("grid").value("n", 1), j.at("grid").value("L", 5));
        }
        c.kernels.clear();
        if (j.contains("kernels")) {
            for (const auto& kj : j.at("kernels")) c.kernels.push_back(detail::parse_kernel(kj));
        }
        if (j.contains("kernel")) c.kernels.insert(c.kernels.begin(), detail::parse_kernel(j.at("kernel")));
        if (c.kernels.empty()) c.kernels.push_back(KernelSpec{});
        if (j.contains("systems")) {
            detail::require_known_keys(j.at("systems"), "systems", {"b1", "b2"});
            if (j.at("systems").contains("b1")) c.sys1 = detail::parse_system(j.at("systems").at("b1"));
            if (j.at("systems").contains("b2")) c.sys2 = detail::parse_system(j.at("systems").at("b2"));
        }
        if (j.contains("stopping")) {
            const auto& sj = j.at("stopping");
            detail::require_known_keys(sj, "stopping", {"delta", "threshold", "dilate_family"});
            const std::string fam = sj.value("dilate_family", "self+double");
            if (fam != "self+double" && fam != "self")
                throw ConfigError("stopping.dilate_family must be 'self+double' or 'self'");
            c.stopping = StoppingParams(sj.value("delta", 0.25), sj.value("threshold", 64.0),
                                        fam == "self" ? DilateFamily::SelfOnly
                                                      : DilateFamily::SelfAndDouble);
        }
        if (j.contains("verification")) {
            const auto& vj = j.at("verification");
            detail::require_known_keys(vj, "verification",
                                       {"q1_generations", "q2_per_q1", "test_functions",
                                        "random_trials", "sweep_max_generation",
                                        "coifman_meyer_samples", "checks"});
            if (vj.contains("q1_generations"))
                c.verification.q1_generations = vj.at("q1_generations").get<std::vector<int>>();
            c.verification.q2_per_q1 = vj.value("q2_per_q1", c.verification.q2_per_q1);
            if (c.verification.q2_per_q1 != "self" && c.verification.q2_per_q1 != "self+children")
                throw ConfigError("verification.q2_per_q1 must be 'self' or 'self+children'");
            if (vj.contains("test_functions")) {
                const auto& tj = vj.at("test_functions");
                detail::require_known_keys(tj, "test_functions", {"count", "kinds"});
                c.verification.test_functions.count = tj.value("count", 4);
                if (tj.contains("kinds"))
                    c.verification.test_functions.kinds =
                        tj.at("kinds").get<std::vector<std::string>>();
            }
            for (const auto& kind : c.verification.test_functions.kinds)
                if (kind != "pm1" && kind != "bounded" && kind != "extremal")
                    throw ConfigError("unknown test function kind '" + kind + "'");
            c.verification.random_trials = vj.value("random_trials", c.verification.random_trials);
            c.verification.sweep_max_generation =
                vj.value("sweep_max_generation", c.verification.sweep_max_generation);
            c.verification.coifman_meyer_samples =
                vj.value("coifman_meyer_samples", c.verification.coifman_meyer_samples);
            if (vj.contains("checks") && vj.at("checks").is_array())
                for (const auto& g : vj.at("checks"))
                    c.verification.groups.insert(g.get<std::string>());
        }
        for (const int g : c.verification.q1_generations)
            if (g < 0 || g > c.grid.L) throw ConfigError("q1 generation out of range");
        if (j.contains("tolerances")) {
            detail::require_known_keys(j.at("tolerances"), "tolerances", {"identity", "scale"});
            c.tolerance_identity = j.at("tolerances").value("identity", c.tolerance_identity);
            c.tolerance_scale = j.at("tolerances").value("scale", c.tolerance_scale);
        }
        c.seed = j.value("seed", c.seed);
        if (j.contains("quadrature")) {
            const std::string q = j.at("quadrature").get<std::string>();
            if (q == "midpoint")
                c.quadrature = QuadratureRule::Midpoint;
            else if (q == "tensor2")
                c.quadrature = QuadratureRule::Tensor2;
            else
                throw ConfigError("quadrature must be 'midpoint' or 'tensor2'");
        }
        if (j.contains("sweep")) {
            const auto& sj = j.at("sweep");
            detail::require_known_keys(sj, "sweep", {"parameter", "values"});
            c.sweep_parameter = sj.at("parameter").get<std::string>();
            c.sweep_values = sj.at("values").get<std::vector<double>>();
            if (c.sweep_parameter != "tau" && c.sweep_parameter != "delta" &&
                c.sweep_parameter != "L" && c.sweep_parameter != "q")
                throw ConfigError("sweep.parameter must be one of tau, delta, L, q");
        }
        // kernels must be constructible on this grid
        for (const auto& ks : c.kernels) (void)kernel_zoo(ks, c.grid.n);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

// The normalized echo: every default materialized, key order canonical.
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["grid"]["n"] = c.grid.n;
    j["grid"]["L"] = c.grid.L;
    if (c.kernels.size() == 1) {
        j["kernel"] = detail::kernel_to_json(c.kernels.front());
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& k : c.kernels) arr.push_back(detail::kernel_to_json(k));
        j["kernels"] = std::move(arr);
    }
    j["systems"]["b1"] = detail::system_to_json(c.sys1);
    j["systems"]["b2"] = detail::system_to_json(c.sys2);
    j["stopping"]["delta"] = c.stopping.delta;
    j["stopping"]["threshold"] = c.stopping.threshold;
    j["stopping"]["dilate_family"] = dilate_family_name(c.stopping.family);
    j["verification"]["q1_generations"] = c.verification.q1_generations;
    j["verification"]["q2_per_q1"] = c.verification.q2_per_q1;
    j["verification"]["test_functions"]["count"] = c.verification.test_functions.count;
    j["verification"]["test_functions"]["kinds"] = c.verification.test_functions.kinds;
    j["verification"]["random_trials"] = c.verification.random_trials;
    j["verification"]["sweep_max_generation"] = c.verification.sweep_max_generation;
    j["verification"]["coifman_meyer_samples"] = c.verification.coifman_meyer_samples;
    if (!c.verification.groups.empty())
        j["verification"]["checks"] =
            std::vector<std::string>(c.verification.groups.begin(), c.verification.groups.end());
    j["tolerances"]["identity"] = c.tolerance_identity;
    j["tolerances"]["scale"] = c.tolerance_scale;
    j["seed"] = c.seed;
    j["quadrature"] = quadrature_name(c.quadrature);
    if (!c.sweep_parameter.empty()) {
        j["sweep"]["parameter"] = c.sweep_parameter;
        j["sweep"]["values"] = c.sweep_values;
    }
    return j;
}

}  // namespace dytb
