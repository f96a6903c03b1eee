#include "ovfl/commands.hpp"
#include "ovfl/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Optimal-velocity / follow-the-leader platoon simulator"};
    app.set_version_flag("--version", std::string(ovfl::version()));
    app.require_subcommand(1);

    ovfl::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Integrate one scenario and write its artifacts");
    simulate->add_option("--scenario", sim.scenario, "Scenario JSON file or preset name")->required();
    simulate->add_option("--out", sim.out, "Output directory")->required();
    simulate->add_flag("--strict", sim.strict, "Exit 5 when any monitor fails");

    ovfl::SweepOptions sweep;
    std::string alpha_list, beta_list;
    std::uint64_t seed = 0;
    auto* sw = app.add_subcommand("sweep", "Run a scenario over an alpha x beta grid");
    sw->add_option("--scenario", sweep.scenario, "Base scenario JSON file or preset name")->required();
    sw->add_option("--alpha", alpha_list, "Comma-separated alpha values")->required();
    sw->add_option("--beta", beta_list, "Comma-separated beta values")->required();
    sw->add_option("--samples", sweep.samples, "Random initial conditions per cell (0: use the scenario's)");
    auto* seed_opt = sw->add_option("--seed", seed, "Sampler seed (default: the scenario's)");
    sw->add_option("--out", sweep.out, "Output directory")->required();

    ovfl::AnalyzeOptions an;
    auto* analyze = app.add_subcommand("analyze", "Recompute monitors from a trajectory CSV");
    analyze->add_option("--csv", an.csv, "Trajectory CSV")->required();
    analyze->add_option("--scenario", an.scenario, "Scenario JSON file or preset name")->required();
    analyze->add_option("--out", an.out, "Monitor report JSON")->required();

    app.add_subcommand("presets", "List the built-in scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*simulate) return ovfl::cmd_simulate(sim, std::cerr);
    if (*sw) {
        if (*seed_opt) sweep.seed = seed;
        try {
            sweep.alpha = ovfl::parse_number_list(alpha_list, "--alpha");
            sweep.beta = ovfl::parse_number_list(beta_list, "--beta");
        } catch (...) {
            return ovfl::report_exception(std::cerr, sweep.out);
        }
        return ovfl::cmd_sweep(sweep, std::cerr);
    }
    if (*analyze) return ovfl::cmd_analyze(an, std::cerr);
    for (const auto& name : ovfl::preset_names()) std::cout << name << '\n';
    return 0;
}
