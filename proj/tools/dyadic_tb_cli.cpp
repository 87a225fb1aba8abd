// Batch driver: parse an experiment config, build grids / kernels /
// systems, run the verification suites, and emit canonical reports and
// plot-ready tables.
//
// Exit codes: 0 success, 1 verification failure (failing items listed on
// stderr), 2 config parse error.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dyadic_tb/bruteforce.hpp"
#include "dyadic_tb/config.hpp"
#include "dyadic_tb/io.hpp"
#include "dyadic_tb/parallel.hpp"
#include "dyadic_tb/run.hpp"

namespace {

using namespace dytb;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    int jobs = 0;
    std::int64_t seed_override = -1;
    double tolerance_scale = 0.0;
    std::string q1_literal;
};

ExperimentConfig load_config(const CommonArgs& args) {
    std::string text;
    try {
        text = read_text_file(args.config_path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    ExperimentConfig cfg = parse_config_text(text);
    if (args.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed_override);
    if (args.tolerance_scale > 0.0) cfg.tolerance_scale = args.tolerance_scale;
    return cfg;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
    std::filesystem::create_directories(args.out_dir);
    return (std::filesystem::path(args.out_dir) / name).string();
}

int emit_report_files(const CommonArgs& args, const BoundReport& rep,
                      const ExperimentConfig& cfg) {
    write_text_file(out_path(args, "report.json"), report_to_json(rep, config_to_json(cfg)));
    write_text_file(out_path(args, "report.csv"), report_to_csv(rep));
    if (!rep.all_pass()) {
        std::cerr << "verification failed:\n";
        for (const auto& name : rep.failing()) std::cerr << "  " << name << "\n";
        return 1;
    }
    return 0;
}

int run_grid_check(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args);
    cfg.verification.groups = {"identities", "kernel", "system", "maximal"};
    const auto rep = run_full_verification(cfg);
    for (const auto& c : rep.checks)
        std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name << " value=" << format_double(c.value)
                  << " threshold=" << format_double(c.threshold) << "\n";
    return emit_report_files(args, rep, cfg);
}

int run_decompose(const CommonArgs& args) {
    const ExperimentConfig cfg = load_config(args);
    const GridSpec spec = cfg.grid;
    const CZOperator T = discretize(kernel_zoo(cfg.kernel(), spec.n), spec, cfg.quadrature);
    PseudoAccretiveSystem sys1(spec, cfg.sys1, 1);
    const DyadicCube q1 =
        args.q1_literal.empty() ? root_cube() : parse_cube(args.q1_literal, spec.n);
    const GridFunction b = sys1.generate(q1);
    const auto data = make_stopping_data(b, T, sys1.q());
    SawtoothDecomposition d;
    try {
        d = decompose(spec, q1, data, cfg.stopping);
    } catch (const RootStoppedError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    nlohmann::json j = decomposition_to_json(d);
    const auto rep = verify_decomposition(d, data);
    j["diagnostics"]["bad_measure_ratio"] = rep.bad_measure_ratio;
    j["diagnostics"]["realized_epsilon"] = rep.realized_epsilon;
    j["diagnostics"]["buffer_measure"] = rep.buffer_measure;
    j["diagnostics"]["partition_ok"] = rep.partition_ok;
    j["diagnostics"]["stopping_sound"] = rep.stopping_sound;
    write_text_file(out_path(args, "decomposition.json"), canonical_json(j) + "\n");
    std::cout << "bad cubes: " << d.bad.size() << ", omega1: " << d.omega1.size()
              << ", buffer: " << d.omega_buffer.size() << "\n";
    return (rep.partition_ok && rep.stopping_sound) ? 0 : 1;
}

int run_verify(const CommonArgs& args) {
    const ExperimentConfig cfg = load_config(args);
    const auto rep = run_full_verification(cfg);
    return emit_report_files(args, rep, cfg);
}

int run_sweep(const CommonArgs& args) {
    const ExperimentConfig base = load_config(args);
    if (base.sweep_parameter.empty()) {
        std::cerr << "sweep: config has no sweep section\n";
        return 2;
    }
    std::string csv = "parameter,value,metric,metric_value,config_hash,seed\n";
    bool all_ok = true;
    for (const double v : base.sweep_values) {
        ExperimentConfig cfg = base;
        cfg.sweep_parameter.clear();
        cfg.sweep_values.clear();
        if (base.sweep_parameter == "tau") {
            for (auto& k : cfg.kernels) k.tau = v;
        } else if (base.sweep_parameter == "delta") {
            cfg.stopping = StoppingParams(v, base.stopping.threshold, base.stopping.family);
        } else if (base.sweep_parameter == "L") {
            cfg.grid = GridSpec(base.grid.n, static_cast<int>(v));
        } else if (base.sweep_parameter == "q") {
            cfg.sys1.q = v;
            cfg.sys2.q = v;
        }
        const auto rep = run_full_verification(cfg);
        all_ok = all_ok && rep.all_pass();
        for (const auto& [metric, value] : rep.metrics)
            csv += base.sweep_parameter + "," + format_double(v) + "," + metric + "," +
                   format_double(value) + "," + rep.config_hash + "," + std::to_string(rep.seed) +
                   "\n";
    }
    write_text_file(out_path(args, "sweep.csv"), csv);
    return all_ok ? 0 : 1;
}

int run_oracle(const CommonArgs& args) {
    const ExperimentConfig cfg = load_config(args);
    const GridSpec spec = cfg.grid;
    if (spec.L > 4) {
        std::cerr << "oracle: brute-force reference is restricted to L <= 4\n";
        return 2;
    }
    const CZKernel kernel = kernel_zoo(cfg.kernel(), spec.n);
    const GridFunction f = random_bounded(spec, cfg.seed, true);

    nlohmann::json j;
    j["config"] = config_to_json(cfg);
    j["input"] = grid_function_to_json(f);
    j["apply"] = grid_function_to_json(bruteforce::apply_operator(kernel, f));
    j["apply_transpose"] = grid_function_to_json(bruteforce::apply_transpose(kernel, f));
    j["b1"] = bruteforce::b1_constant(kernel, spec);
    nlohmann::json t1 = nlohmann::json::object();
    nlohmann::json averages = nlohmann::json::object();
    for (const auto& q : all_cubes(spec)) {
        const std::string literal = format_cube(q, spec.n);
        t1[literal] = {bruteforce::t1loc_direct(kernel, spec, q),
                       bruteforce::t1loc_transpose(kernel, spec, q)};
        const cplx avg = bruteforce::cube_average(f, q);
        averages[literal] = {avg.real(), avg.imag()};
    }
    j["t1loc"] = std::move(t1);
    j["averages"] = std::move(averages);
    write_text_file(out_path(args, "golden.json"), canonical_json(j) + "\n");
    std::cout << "golden reference written for kernel '" << kernel.name << "' at L=" << spec.L
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale dyadic testing-condition verifier"};
    app.require_subcommand(1);

    CommonArgs args;
    app.add_option("--jobs", args.jobs, "worker thread count (DYADIC_TB_JOBS as fallback)");

    const auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        auto* opt = cmd->add_option("--config", args.config_path, "experiment config (JSON)");
        if (needs_config) opt->required();
        cmd->add_option("--out", args.out_dir, "output directory");
        cmd->add_option("--seed-override", args.seed_override, "replace the config seed");
        cmd->add_option("--tolerance-scale", args.tolerance_scale,
                        "scale factor on identity tolerances");
    };

    auto* grid_check = app.add_subcommand("grid-check", "run the module invariant suites");
    add_common(grid_check);
    auto* decompose_cmd =
        app.add_subcommand("decompose", "run the stopping time and emit the decomposition");
    add_common(decompose_cmd);
    decompose_cmd->add_option("--q1", args.q1_literal, "top cube literal (default: root)");
    auto* verify = app.add_subcommand("verify", "run the full verification pipeline");
    add_common(verify);
    auto* sweep = app.add_subcommand("sweep", "sweep a parameter and emit a long-format table");
    add_common(sweep);
    auto* oracle = app.add_subcommand("oracle", "emit brute-force golden references");
    add_common(oracle);

    CLI11_PARSE(app, argc, argv);
    if (args.jobs > 0) dytb::set_job_count(args.jobs);

    try {
        if (grid_check->parsed()) return run_grid_check(args);
        if (decompose_cmd->parsed()) return run_decompose(args);
        if (verify->parsed()) return run_verify(args);
        if (sweep->parsed()) return run_sweep(args);
        if (oracle->parsed()) return run_oracle(args);
    } catch (const dytb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
