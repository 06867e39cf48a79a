// main.cpp: command line front end for the telegraph dephasing simulator

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "telegraph/telegraph.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir{"."};
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> mc_traj;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_out = true) {
    cmd->add_option("--config", flags.config_path,
                    "Flat key=value configuration file");
    if (with_out)
        cmd->add_option("--out", flags.out_dir, "Output directory")
            ->capture_default_str();
    cmd->add_option("--set", flags.sets,
                    "Override one configuration key, e.g. --set noise.a=0.5")
        ->type_name("KEY=VALUE");
    cmd->add_option("--seed", flags.seed, "Monte Carlo master seed");
    cmd->add_option("--mc-traj", flags.mc_traj, "Monte Carlo trajectory count");
}

telegraph::RunConfig build_config(const CommonFlags& flags) {
    telegraph::RunConfig config;
    if (!flags.config_path.empty())
        telegraph::load_config_file(config, flags.config_path);
    for (const std::string& line : flags.sets)
        telegraph::apply_setting_line(config, line);
    if (flags.seed) config.mc.seed = *flags.seed;
    if (flags.mc_traj) config.mc.n_traj = *flags.mc_traj;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dephasing of a two-level system under nonstationary "
                 "telegraph noise: coherence, Bloch trajectories, geometric "
                 "phases, and memory measures"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "Simulate one parameter point");
    add_common_flags(run_cmd, run_flags);

    CommonFlags sweep_flags;
    std::string sweep_axis;
    std::string sweep_values;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Run a one-parameter family of points");
    add_common_flags(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--axis", sweep_axis,
                          "Swept parameter: a, nu, kappa, lambda, theta, omega0")
        ->required();
    sweep_cmd->add_option("--values", sweep_values,
                          "Comma-separated list of axis values")
        ->required();

    CommonFlags cmp_flags;
    bool corrupt_residue = false;
    CLI::App* cmp_cmd = app.add_subcommand(
        "compare-oracles", "Cross-check the coherence evaluators");
    add_common_flags(cmp_cmd, cmp_flags, false);
    cmp_cmd->add_flag("--corrupt-residue", corrupt_residue,
                      "Perturb a residue to exercise the failure path")
        ->group("");

    CommonFlags rep_flags;
    std::string preset;
    CLI::App* rep_cmd =
        app.add_subcommand("reproduce", "Emit the CSV set behind one figure");
    rep_cmd->add_option("preset", preset, "fig1a, fig1b, fig2a, fig2b, or fig3")
        ->required();
    add_common_flags(rep_cmd, rep_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*run_cmd) {
            const auto path =
                telegraph::run(build_config(run_flags), run_flags.out_dir);
            std::cout << "wrote " << path.string() << "\n";
        } else if (*sweep_cmd) {
            std::vector<double> values;
            for (const std::string& part :
                 telegraph::detail::split(sweep_values, ','))
                values.push_back(
                    telegraph::detail::parse_double_value("sweep.values", part));
            telegraph::sweep(sweep_axis, values, build_config(sweep_flags),
                             sweep_flags.out_dir);
            std::cout << "wrote " << values.size() << " point files and summary.csv"
                      << " in " << sweep_flags.out_dir << "\n";
        } else if (*cmp_cmd) {
            const telegraph::OracleComparison report =
                telegraph::compare_oracles(build_config(cmp_flags), corrupt_residue);
            for (const auto& lane : report.lanes)
                std::cout << lane.quantity << ": max deviation " << lane.max_dev
                          << " (tolerance " << lane.tolerance << ") "
                          << (lane.pass ? "PASS" : "FAIL") << "\n";
            for (const auto& lane : report.lanes)
                if (!lane.pass) {
                    std::cerr << "tolerance breach: " << lane.quantity << "\n";
                    return 2;
                }
        } else if (*rep_cmd) {
            const auto written = telegraph::reproduce(
                preset, build_config(rep_flags), rep_flags.out_dir);
            std::cout << "wrote " << written.size() << " files in "
                      << rep_flags.out_dir << "\n";
        }
    } catch (const telegraph::ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const telegraph::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const telegraph::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
