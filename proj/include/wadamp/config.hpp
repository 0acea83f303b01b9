#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "wadamp/modal.hpp"
#include "wadamp/plant.hpp"

namespace wadamp::pipeline {

struct SamplingConfig {
    double raw_sample_time = 0.0032;  // s
    int decimation = 10;
    double window_length = 20.0;      // s
    double noise_std = 0.0;           // pu, added by the measurement channel
    double lead = 0.512;              // s of pre-disturbance data kept in the window
};

struct IdentificationConfig {
    std::vector<int> order_candidates = {5};
    int max_iterations = 200;
    double objective_tolerance = 1e-10;
    double stability_margin = 1e-3;
};

struct ControllerConfig {
    bool enabled = true;
    double rho = 1.0;
    double process_noise = 1e-6;
    double measurement_noise = 1e-4;
    std::optional<double> saturation = 0.1;  // pu; absent disables the limit
    std::optional<double> delay;             // s; defaults to the preset's inherent delay
    double riccati_tolerance = 1e-12;
    // The literal backward recursion converges at the squared closed-loop
    // spectral radius; identified models with a pole at the stability margin
    // need far more than the default.
    int riccati_max_iterations = 10000;
};

struct PeakSpec {
    std::string channel;
    double time = 0.0;  // s
};

struct EvaluationConfig {
    std::optional<plant::DisturbanceSpec> disturbance;  // default: pulse on the first input
    double horizon = 40.0;                              // s
    double measurement_noise = 0.0;                     // pu on the controller's input signal
    std::optional<double> auc_from;                     // default: disturbance start
    std::optional<double> auc_to;                       // default: horizon
    std::vector<PeakSpec> peaks;
};

/// Everything one end-to-end run needs. Unknown keys in the file are errors.
struct PipelineConfig {
    std::string plant;                                // preset name or path to a preset json
    std::vector<plant::DisturbanceSpec> experiments;  // default: one pulse per input
    SamplingConfig sampling;
    IdentificationConfig identification;
    modal::FrequencyBand mode_band;
    ControllerConfig controller;
    EvaluationConfig evaluation;
    std::vector<double> delay_sweep = {0.001, 0.05, 0.3, 0.5};  // intentional extra delays, s
    std::string output_dir = "out";
    std::uint64_t seed = 1;

    void validate() const;
    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig from_file(const std::string& path);
};

/// FNV-1a 64-bit hash of the canonical config serialization; stamped into
/// reports for provenance.
std::string config_hash(const PipelineConfig& config);

}  // namespace wadamp::pipeline
