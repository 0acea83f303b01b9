#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wadamp/data_window.hpp"
#include "wadamp/lti.hpp"

namespace wadamp::plant {

// ---------------------------------------------------------------------------
// Parameter types
// ---------------------------------------------------------------------------

/// Coefficients of the coupled two-input/two-output example system.
struct CoupledExampleParams {
    double a0 = 1.0;
    double a1 = 1.0;
    double a2 = 1.0;
};

/// One additive term weight * (delta_from - delta_to) of a tie-line output.
struct TieLineTerm {
    int from = 0;
    int to = 0;
    double weight = 0.0;
};

struct TieLine {
    std::string name;
    std::vector<TieLineTerm> terms;
};

/// Linear multi-machine swing surrogate: states (delta_i, omega_i), inputs
/// are per-machine reference perturbations, outputs are tie-line active-power
/// deviations as weighted angle differences.
struct SwingSurrogateParams {
    std::vector<double> inertia;         // M_i in s^2, > 0
    std::vector<double> damping;         // D_i in pu, >= 0
    Eigen::MatrixXd synchronizing;       // K_s, symmetric with zero row sums
    std::vector<double> input_gain;      // per-machine input gain, pu
    std::vector<TieLine> tie_lines;

    int machine_count() const { return static_cast<int>(inertia.size()); }
    void validate() const;

    std::vector<std::string> input_names() const;   // u_1 .. u_n
    std::vector<std::string> output_names() const;  // tie-line names
    std::vector<std::string> state_names() const;   // delta_i then omega_i
};

enum class DisturbanceKind { Pulse, Step, FilteredNoise };

struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::Pulse;
    std::string input;        // target input channel name
    double start = 0.0;       // s
    double duration = 0.05;   // s
    double amplitude = 0.05;  // pu

    void validate() const;
};

/// Input/output channel labels for an unlabeled StateSpaceModel. Empty lists
/// fall back to u_i / y_i.
struct ChannelNames {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

struct MeasureOptions {
    /// Start of the retained window; defaults to the raw window start.
    std::optional<double> align_start;
    /// Raw samples with t strictly below this are averaged for per-channel
    /// mean removal (intended: the disturbance start). No removal if at or
    /// before the raw start.
    std::optional<double> mean_until;
    std::uint64_t noise_seed = 0;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// Exact 4-state continuous realization of the coupled example (D = 0).
lti::StateSpaceModel build_coupled_example(const CoupledExampleParams& params);

/// Continuous 2n-state swing surrogate; one zero eigenvalue from the angle
/// reference, tie-line power outputs.
lti::StateSpaceModel build_swing_surrogate(const SwingSurrogateParams& params);

// ---------------------------------------------------------------------------
// Measurement chain
// ---------------------------------------------------------------------------

/// Discretizes (Tustin) if needed, injects the disturbance, simulates from
/// rest, and returns all inputs and outputs as one window.
DataWindow apply_disturbance(const lti::StateSpaceModel& model, const DisturbanceSpec& spec,
                             double horizon, double sample_time,
                             const ChannelNames& names = {}, std::uint64_t seed = 0);

/// Keeps every decimation-th raw sample, truncates to the requested window,
/// removes the pre-disturbance mean, and adds white Gaussian noise. The
/// paper's chain decimates raw data directly; no anti-alias filter is applied
/// here either, so callers must keep disturbance energy below the decimated
/// Nyquist rate.
DataWindow measurement_channel(const DataWindow& raw, int decimation, double window_length,
                               double noise_std, const MeasureOptions& opts = {});

/// Nearest-integer sample delay, ties rounded up.
Eigen::Index delay_samples(double delay, double sample_time);

/// Shifts every channel by round(delay / Ts) samples, zero-padding the front;
/// window length is preserved.
DataWindow delay_block(const DataWindow& signal, double delay);

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// A named plant shipped as a JSON file: either the coupled example or a
/// swing surrogate, plus the inherent control-loop delay to assume for it.
struct PlantPreset {
    std::string name;
    std::optional<CoupledExampleParams> coupled;
    std::optional<SwingSurrogateParams> swing;
    double inherent_delay = 0.0;  // s

    lti::StateSpaceModel build() const;
    ChannelNames channel_names() const;
    std::vector<std::string> state_names() const;
};

/// Directory holding preset JSON files; WADAMP_PRESET_DIR in the environment
/// overrides the compiled-in default.
std::string preset_dir();

/// Loads by preset name (resolved inside preset_dir) or by explicit path to
/// a .json file.
PlantPreset load_preset(const std::string& name_or_path);

}  // namespace wadamp::plant
