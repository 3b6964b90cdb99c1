// growthdesign: batch front end for locally D-optimal growth-curve designs.

#include "growthdesign/error.hpp"
#include "growthdesign/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace gd = growthdesign;

namespace {

struct Flags {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::string figure;
};

void add_common_flags(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config_path, "Scenario config file (YAML)");
    cmd->add_option("--preset", flags.preset, "Built-in scenario, e.g. paper-table1");
    cmd->add_option("--out", flags.out_dir, "Output directory (overrides output.dir)");
    cmd->add_option("--jobs", flags.jobs, "Worker threads for sweeps (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", flags.seed, "Seed for the solver's random restarts");
    cmd->add_option("--tol", flags.tol, "Certificate tolerance on the gap, in units of I psi")
        ->check(CLI::PositiveNumber);
}

gd::ScenarioConfig resolve_config(const Flags& flags, gd::RunMode mode) {
    if (flags.config_path.empty() == flags.preset.empty()) {
        throw gd::Error(gd::ErrorCode::Usage, "give exactly one of --config or --preset");
    }
    gd::ScenarioConfig cfg;
    if (!flags.preset.empty()) {
        auto found = gd::preset(flags.preset);
        if (!found) {
            throw gd::Error(gd::ErrorCode::Usage, "unknown preset '" + flags.preset + "'");
        }
        cfg = std::move(*found);
    } else {
        cfg = gd::load_config(flags.config_path);
    }
    cfg.mode = mode;
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.jobs) cfg.jobs = *flags.jobs;
    if (flags.seed) cfg.solver.seed = *flags.seed;
    if (flags.tol) cfg.solver.gap_tol = *flags.tol;
    if (!flags.figure.empty()) cfg.figure_kind = flags.figure;
    gd::validate(cfg);
    return cfg;
}

void print_outcome(const gd::RunReport& report, const gd::ScenarioConfig& cfg) {
    if (cfg.mode == gd::RunMode::Sweep || cfg.mode == gd::RunMode::FigureData) {
        std::cout << gd::to_json(report.summary);
    } else {
        std::cout << gd::to_json(report);
    }
    std::cerr << "wrote " << report.cells.size() << " cell(s) to " << cfg.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Locally D-optimal designs for growth curves with correlated random effects"};
    app.require_subcommand(1);

    Flags flags;
    const std::pair<const char*, gd::RunMode> verbs[] = {
        {"solve", gd::RunMode::Solve},
        {"certify", gd::RunMode::Certify},
        {"efficiency", gd::RunMode::Efficiency},
        {"sweep", gd::RunMode::Sweep},
        {"figure-data", gd::RunMode::FigureData},
    };
    const char* help[] = {
        "Solve for the optimal approximate design",
        "Check a given design against the equivalence conditions",
        "D-efficiency of a given design against a reference",
        "Solve every cell of a parameter grid",
        "Run a sweep and write a plot-ready table",
    };
    std::vector<std::pair<CLI::App*, gd::RunMode>> commands;
    for (std::size_t i = 0; i < std::size(verbs); ++i) {
        CLI::App* cmd = app.add_subcommand(verbs[i].first, help[i]);
        add_common_flags(cmd, flags);
        if (verbs[i].second == gd::RunMode::FigureData) {
            cmd->add_option("--figure", flags.figure, "Figure kind, e.g. weight-vs-rho");
        }
        commands.emplace_back(cmd, verbs[i].second);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(gd::ExitCode::Usage);
    }

    try {
        gd::RunMode mode = gd::RunMode::Solve;
        for (const auto& [cmd, m] : commands) {
            if (cmd->parsed()) mode = m;
        }
        const auto cfg = resolve_config(flags, mode);
        const auto report = gd::run_scenario(cfg);
        gd::write_outputs(report, cfg, cfg.out_dir);
        print_outcome(report, cfg);
        return static_cast<int>(gd::exit_code(report));
    } catch (const gd::Error& e) {
        std::cerr << "error (" << gd::to_string(e.code()) << "): " << e.what() << "\n";
        switch (e.code()) {
            case gd::ErrorCode::Infeasible:
                return static_cast<int>(gd::ExitCode::Infeasible);
            case gd::ErrorCode::Certificate:
                return static_cast<int>(gd::ExitCode::NotConverged);
            default:
                return static_cast<int>(gd::ExitCode::Usage);
        }
    }
}
