#include <CLI11.hpp>
#include <iostream>

#include "pxsys/errors.hpp"
#include "pxsys/runner.hpp"

namespace {

pxsys::ScenarioConfig load(const std::string& path, std::uint64_t seed_override, bool has_seed,
                           double tol_override, bool has_tol, const std::string& out_override) {
    pxsys::ScenarioConfig cfg = pxsys::parse_config(path);
    if (has_seed) cfg.seed = seed_override;
    if (has_tol) cfg.solver.tol = tol_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver and verification harness for singular quasilinear systems with "
                 "variable-exponent Laplacians"};
    app.require_subcommand(1);

    std::string config_path, out_dir, sweep_param = "gamma";
    std::uint64_t seed = 0;
    bool has_seed = false;
    double tol = 0.0;
    bool has_tol = false;
    int jobs = 1;
    std::vector<double> sweep_values;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "scenario config file (JSON)")->required();
        cmd->add_option("--out", out_dir, "output directory override");
        cmd->add_option("--seed", seed, "seed override")->each([&](const std::string&) { has_seed = true; });
        cmd->add_option("--tol", tol, "solver tolerance override")->each([&](const std::string&) { has_tol = true; });
    };

    CLI::App* validate_cmd = app.add_subcommand("validate", "check the config and its hypotheses");
    add_common(validate_cmd);
    CLI::App* run_cmd = app.add_subcommand("run", "run the scenario pipeline and write reports");
    add_common(run_cmd);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run the scenario over a parameter range");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--parameter", sweep_param, "gamma | theta | resolution");
    sweep_cmd->add_option("--values", sweep_values, "parameter values")->required();
    sweep_cmd->add_option("--jobs", jobs, "concurrent runs");
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "brute-force comparison on a tiny mesh");
    add_common(oracle_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) {
            const pxsys::ScenarioConfig cfg = load(config_path, seed, has_seed, tol, has_tol, out_dir);
            std::cout << "config ok: " << cfg.name << " (regime " << pxsys::regime_name(cfg.regime)
                      << ")\n";
            return 0;
        }
        if (run_cmd->parsed()) {
            const pxsys::ScenarioConfig cfg = load(config_path, seed, has_seed, tol, has_tol, out_dir);
            const pxsys::RunReport report = pxsys::run_scenario(cfg);
            pxsys::write_report_files(report, cfg);
            std::cout << report.doc["status"].dump() << "\n";
            return report.exit_code;
        }
        if (sweep_cmd->parsed()) {
            const pxsys::ScenarioConfig cfg = load(config_path, seed, has_seed, tol, has_tol, out_dir);
            const pxsys::SweepResult result = pxsys::sweep(cfg, sweep_param, sweep_values, jobs);
            int worst = 0;
            std::ostringstream csv;
            csv << "value,exit_code,certified,ok\n";
            for (size_t k = 0; k < result.runs.size(); ++k) {
                pxsys::ScenarioConfig sub = cfg;
                sub.out_dir = result.runs[k].doc["config"]["output"]["dir"].get<std::string>();
                pxsys::write_report_files(result.runs[k], sub);
                const auto& row = result.summary["rows"][k];
                csv << row["value"].get<double>() << "," << row["exit_code"].get<int>() << ","
                    << (row["certified"].get<bool>() ? 1 : 0) << ","
                    << (row["ok"].get<bool>() ? 1 : 0) << "\n";
                worst = std::max(worst, result.runs[k].exit_code);
            }
            pxsys::write_text_atomic(cfg.out_dir + "/sweep_summary.csv", csv.str());
            std::cout << result.summary.dump(2) << "\n";
            return worst;
        }
        if (oracle_cmd->parsed()) {
            const pxsys::ScenarioConfig cfg = load(config_path, seed, has_seed, tol, has_tol, out_dir);
            const pxsys::RunReport report = pxsys::run_oracle(cfg);
            pxsys::write_report_files(report, cfg);
            std::cout << report.doc["status"].dump() << "\n";
            return report.exit_code;
        }
    } catch (const pxsys::Error& e) {
        std::cerr << "error (" << pxsys::error_kind_name(e.kind()) << "): " << e.what() << "\n";
        return pxsys::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
