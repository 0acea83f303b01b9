#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "wadamp/errors.hpp"
#include "wadamp/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Pipeline configuration JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "Output directory (overrides the config)");
    cmd->add_option("--seed", args.seed, "RNG seed (overrides the config)");
}

wadamp::pipeline::PipelineConfig load(const CommonArgs& args) {
    auto config = wadamp::pipeline::PipelineConfig::from_file(args.config_path);
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    if (args.seed) config.seed = *args.seed;
    return config;
}

int run_stage(const CommonArgs& args, wadamp::pipeline::Stage stage) {
    auto config = load(args);
    auto report = wadamp::pipeline::run_pipeline(config, stage);
    using wadamp::pipeline::Stage;
    switch (stage) {
        case Stage::Simulate:
            std::cout << "wrote ring-down windows to " << config.output_dir << "\n";
            break;
        case Stage::Identify:
            std::cout << "identified order-" << report.chosen_order << " model ("
                      << (report.fit.converged ? "converged" : "not converged") << "), wrote "
                      << config.output_dir << "/model.json\n";
            break;
        case Stage::Modes:
            std::cout << "inter-area mode " << report.inter_area.frequency_hz
                      << " Hz (zeta " << report.inter_area.damping_ratio
                      << "), FFT cross-check " << report.fft_frequency << " Hz\n";
            break;
        case Stage::SelectLoop:
            std::cout << "selected loop: " << report.selected_output << " <- "
                      << report.selected_input << "\n";
            break;
        case Stage::Design:
            std::cout << "designed WADC for " << report.selected_output << " <- "
                      << report.selected_input << ", wrote " << config.output_dir
                      << "/design.json\n";
            break;
        case Stage::Evaluate:
        case Stage::DelaySweep:
            std::cout << report.text();
            break;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Measurement-based wide-area damping of inter-area oscillations"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* simulate = app.add_subcommand("simulate", "Simulate ring-down experiments and export "
                                                    "the measured windows");
    auto* identify = app.add_subcommand("identify", "Identify the shared-denominator MIMO model");
    auto* modes = app.add_subcommand("modes", "Extract modes and cross-check against the FFT");
    auto* select = app.add_subcommand("select-loop", "Rank control loops by residue magnitude");
    auto* design = app.add_subcommand("design", "Design the DLQR + Kalman damping controller");
    auto* run = app.add_subcommand("run", "Run the full pipeline and write the report");
    auto* sweep = app.add_subcommand("delay-sweep", "Closed-loop runs over the configured extra "
                                                    "delays");
    for (auto* cmd : {simulate, identify, modes, select, design, run, sweep}) {
        add_common(cmd, args);
    }

    CLI11_PARSE(app, argc, argv);

    using wadamp::pipeline::Stage;
    try {
        if (simulate->parsed()) return run_stage(args, Stage::Simulate);
        if (identify->parsed()) return run_stage(args, Stage::Identify);
        if (modes->parsed()) return run_stage(args, Stage::Modes);
        if (select->parsed()) return run_stage(args, Stage::SelectLoop);
        if (design->parsed()) return run_stage(args, Stage::Design);
        if (run->parsed()) return run_stage(args, Stage::Evaluate);
        if (sweep->parsed()) return run_stage(args, Stage::DelaySweep);
    } catch (const wadamp::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const wadamp::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const wadamp::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
