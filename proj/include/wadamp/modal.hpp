#pragma once

#include <complex>
#include <string>
#include <vector>

#include "wadamp/data_window.hpp"
#include "wadamp/ident.hpp"
#include "wadamp/lti.hpp"

namespace wadamp::modal {

/// One oscillatory mode (positive-frequency representative of a conjugate
/// pair) or real pole of the identified model, in both domains.
struct ModeInfo {
    lti::Complex discrete_pole;    // z-plane
    lti::Complex continuous_pole;  // s = sigma + j omega via inverse Tustin
    double frequency_hz = 0.0;     // |omega| / 2 pi
    double damping_ratio = 0.0;    // -sigma / |s|
};

/// Normalized residue magnitudes of every loop at one mode; the strongest
/// loop reads exactly 1.
struct ResidueTable {
    ModeInfo mode;
    std::vector<std::string> output_names;
    std::vector<std::string> input_names;
    Eigen::MatrixXd normalized;           // m x p, in [0, 1]
    Eigen::MatrixXd raw_magnitude;        // m x p
    Eigen::MatrixXcd raw;                 // complex residues, for diagnostics
    Eigen::Index argmax_output = 0;
    Eigen::Index argmax_input = 0;
};

struct FrequencyBand {
    double lo_hz = 0.1;
    double hi_hz = 1.0;
};

/// Shared-denominator roots -> inverse Tustin -> continuous modes, sorted by
/// frequency. One entry per conjugate pair plus one per real pole.
std::vector<ModeInfo> extract_modes(const ident::MimoTfModel& model);

/// The in-band mode with the largest aggregate residue energy across loops;
/// ties break toward the lower frequency. Errors when no mode lies in band.
ModeInfo inter_area_mode(const ident::MimoTfModel& model, const std::vector<ModeInfo>& modes,
                         const FrequencyBand& band = {});

/// Continuous-domain residues of every loop at the mode pole, normalized by
/// the largest magnitude.
ResidueTable residue_table(const ident::MimoTfModel& model, const ModeInfo& mode);

/// Argmax of the normalized table; ties break to the lower output index, then
/// the lower input index.
std::pair<Eigen::Index, Eigen::Index> select_loop(const ResidueTable& table);

/// Magnitude-spectrum peak inside the band, Hann windowed, zero-padded x8,
/// refined by quadratic interpolation around the peak bin. The window must
/// span at least two cycles of the band's lower edge.
double fft_dominant_frequency(const DataWindow& window, const std::string& channel,
                              const FrequencyBand& band = {});

}  // namespace wadamp::modal
