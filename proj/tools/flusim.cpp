// Command-line front end: run, compare, validate-alignment, sir.

#include "flusim/scenario.hpp"
#include "flusim/sir_baseline.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flusim;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot read " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", path + ": invalid JSON: " + e.what());
    }
}

ScenarioConfig load_with_overrides(const std::string& path, const std::string& output_dir, const std::string& seeds)
{
    auto config = load_config(path);
    if (!output_dir.empty()) {
        config.output_dir = output_dir;
    }
    if (!seeds.empty()) {
        config.run_seeds = parse_seed_list(seeds);
        config.validate();
    }
    return config;
}

// {"r0": 3, "infection_duration": 9.5} or {"beta": ..., "gamma": ...}, plus i0, m0, t_end, dt.
int run_sir(const std::string& path, const std::string& output_dir, bool quiet)
{
    const json doc = read_json_file(path);
    static const std::set<std::string> known = {"r0", "infection_duration", "beta", "gamma", "i0", "m0", "t_end", "dt"};
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!known.contains(it.key())) {
            throw ConfigError(it.key(), "unknown key");
        }
    }
    SirParams p;
    try {
        const double i0 = doc.value("i0", 1e-4);
        const double m0 = doc.value("m0", 0.0);
        if (doc.contains("beta") || doc.contains("gamma")) {
            p.beta = doc.at("beta").get<double>();
            p.gamma = doc.at("gamma").get<double>();
            p.i0 = i0;
            p.m0 = m0;
        } else {
            p = SirParams::from_r0(doc.value("r0", 3.0), doc.value("infection_duration", 9.5), i0, m0);
        }
        p.validate();
    } catch (const json::exception& e) {
        throw ConfigError("", e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("", e.what());
    }
    const double t_end = doc.value("t_end", 500.0);
    const double dt = doc.value("dt", 0.05);
    const auto traj = integrate(p, t_end, dt);
    const auto peak = peak_infected(traj);

    const fs::path dir = output_dir.empty() ? fs::path("output") : fs::path(output_dir);
    fs::create_directories(dir);
    std::ofstream out(dir / "sir_trajectory.csv", std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + (dir / "sir_trajectory.csv").string());
    }
    write_trajectory_csv(out, traj);
    const json report = {{"r0", p.r0()},
                         {"beta", p.beta},
                         {"gamma", p.gamma},
                         {"peak_t", peak.t},
                         {"peak_i", peak.i},
                         {"analytic_peak_i", analytic_peak(p.r0(), 1.0 - p.i0 - p.m0, p.i0)},
                         {"final_r", traj.samples.back().r},
                         {"final_size_r0", final_size(p.r0())}};
    std::ofstream(dir / "sir_report.json", std::ios::binary) << report.dump(2) << '\n';
    if (!quiet) {
        std::cout << report.dump(2) << '\n';
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Agent-based pandemic influenza simulator"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("--quiet,-q", quiet, "Suppress progress output");

    std::string config_path;
    std::string output_dir;
    std::string seeds;

    auto* run = app.add_subcommand("run", "Run a scenario batch from a JSON config");
    run->add_option("config", config_path, "Scenario config")->required();
    run->add_option("--output-dir", output_dir, "Override output_dir");
    run->add_option("--seeds", seeds, "Override run_seeds, e.g. 1-30 or 1,4,9");

    std::string summary_a;
    std::string summary_b;
    auto* compare = app.add_subcommand("compare", "Paired-seed comparison of two summary.json files");
    compare->add_option("baseline", summary_a, "Baseline summary.json")->required();
    compare->add_option("variant", summary_b, "Variant summary.json")->required();
    compare->add_option("--output-dir", output_dir, "Write comparison.csv and comparison.json here");

    auto* align = app.add_subcommand("validate-alignment", "Compare ABM runs against the SIR ODE");
    align->add_option("config", config_path, "Scenario config without strategies")->required();
    align->add_option("--output-dir", output_dir, "Override output_dir");
    align->add_option("--seeds", seeds, "Override run_seeds");

    std::string sir_path;
    auto* sir = app.add_subcommand("sir", "Integrate the SIR baseline only");
    sir->add_option("params", sir_path, "SIR params JSON")->required();
    sir->add_option("--output-dir", output_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        RunOptions options;
        options.quiet = quiet;
        if (*run) {
            run_scenario(load_with_overrides(config_path, output_dir, seeds), options);
        } else if (*align) {
            validate_alignment(load_with_overrides(config_path, output_dir, seeds), options);
        } else if (*compare) {
            const auto table = compare_scenarios(summary_from_json(read_json_file(summary_a)),
                                                 summary_from_json(read_json_file(summary_b)));
            if (!output_dir.empty()) {
                fs::create_directories(output_dir);
                std::ofstream csv(fs::path(output_dir) / "comparison.csv", std::ios::binary);
                write_comparison_csv(csv, table);
                std::ofstream(fs::path(output_dir) / "comparison.json", std::ios::binary)
                    << comparison_to_json(table).dump(2) << '\n';
            }
            if (!quiet) {
                std::cout << "metric,mean_delta,median_delta,negative,zero,positive,sign_test_p\n";
                for (const auto& m : table.metrics) {
                    std::cout << m.metric << ',' << m.mean_delta << ',' << m.median_delta << ',' << m.negative << ','
                              << m.zero << ',' << m.positive << ',' << m.sign_test_p << '\n';
                }
            }
        } else if (*sir) {
            return run_sir(sir_path, output_dir, quiet);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
