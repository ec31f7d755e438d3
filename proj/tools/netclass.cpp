#include "netclass/error.hpp"
#include "netclass/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Outcome classification from expression data with network and pathway features"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(netclass::tool_version));

    netclass::RunOptions run;
    std::uint64_t seed_override = 0;
    auto* run_cmd = app.add_subcommand("run", "Run every experiment cell of a spec file");
    run_cmd->add_option("--spec", run.spec, "Experiment spec file")->required();
    run_cmd->add_option("--out", run.out, "Output directory")->required();
    run_cmd->add_option("--jobs", run.jobs, "Worker threads")->check(CLI::PositiveNumber);
    auto* seed_opt = run_cmd->add_option("--seed-override", seed_override, "Replace the spec's base seed");
    run_cmd->add_flag("--no-cache", [&](std::int64_t) { run.use_cache = false; }, "Ignore and do not write the extraction cache");
    run_cmd->add_option("--only", run.only, "Run only cells whose label contains this text");

    std::filesystem::path synth_spec, synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic cohorts and secondary data");
    synth_cmd->add_option("--spec", synth_spec, "Synthetic data spec file")->required();
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();

    std::filesystem::path report_in, report_out;
    auto* report_cmd = app.add_subcommand("report", "Build the analysis bundle from a run directory");
    report_cmd->add_option("results_dir", report_in, "Directory holding results.jsonl")->required();
    report_cmd->add_option("--out", report_out, "Output directory (default: <results_dir>/report)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            if (*seed_opt) {
                run.seed_override = seed_override;
            }
            auto summary = netclass::run_experiments(run);
            std::cout << summary.cells << " cells, " << summary.results << " results, " << summary.unavailable_cells
                      << " unavailable cells, cache " << summary.cache_hits << " hits / " << summary.cache_misses
                      << " misses\n";
        } else if (*synth_cmd) {
            netclass::synthesize(synth_spec, synth_out);
        } else if (*report_cmd) {
            netclass::report(report_in, report_out.empty() ? report_in / "report" : report_out);
        }
    } catch (const netclass::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
