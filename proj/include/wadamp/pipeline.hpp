#pragma once

#include <string>
#include <vector>

#include "wadamp/config.hpp"
#include "wadamp/ident.hpp"
#include "wadamp/modal.hpp"
#include "wadamp/plant.hpp"
#include "wadamp/wadc.hpp"

namespace wadamp::pipeline {

struct ChannelMetrics {
    std::string channel;
    double auc_without = 0.0;
    double auc_with = 0.0;
    double reduction_percent = 0.0;  // 100 (1 - with/without)
};

struct PeakMetrics {
    std::string channel;
    double time = 0.0;
    double peak_without = 0.0;
    double peak_with = 0.0;
    double reduction_percent = 0.0;
};

struct DelayRow {
    double delay = 0.0;           // intentional extra delay, s
    double relative_error = 0.0;  // vs the minimal-delay run, selected output
    double auc = 0.0;             // selected output over the metric interval
};

struct RunReport {
    std::string preset;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string timestamp;

    ident::MimoTfModel model;
    ident::FitReport fit;
    int chosen_order = 0;

    std::vector<modal::ModeInfo> modes;
    modal::ModeInfo inter_area;
    double fft_frequency = 0.0;  // cross-check on the first output channel

    modal::ResidueTable residues;
    std::string selected_output;
    std::string selected_input;

    wadc::WadcDesign design;

    std::vector<ChannelMetrics> metrics;       // per channel + aggregate rows
    std::vector<PeakMetrics> peaks;
    std::vector<DelayRow> delay_table;         // filled by delay_sweep runs

    std::string text() const;
    nlohmann::json to_json() const;
};

/// How far to take the pipeline; each stage writes its artifacts into
/// config.output_dir and implies everything before it.
enum class Stage { Simulate, Identify, Modes, SelectLoop, Design, Evaluate, DelaySweep };

/// Executes the measurement -> identification -> modal analysis -> design ->
/// evaluation chain up to `stage`, deterministic for a fixed seed.
RunReport run_pipeline(const PipelineConfig& config, Stage stage = Stage::Evaluate);

/// One closed-loop run per intentional delay (on top of the configured
/// inherent delay), each compared against the minimal-delay reference.
std::vector<DelayRow> delay_sweep(const PipelineConfig& config,
                                  const std::vector<double>& delays);

// Artifact serialization (also used by the CLI and tests).
nlohmann::json model_to_json(const ident::MimoTfModel& model);
ident::MimoTfModel model_from_json(const nlohmann::json& j);
nlohmann::json design_to_json(const wadc::WadcDesign& design, const std::string& output_name,
                              const std::string& input_name);
wadc::WadcDesign design_from_json(const nlohmann::json& j);

}  // namespace wadamp::pipeline
