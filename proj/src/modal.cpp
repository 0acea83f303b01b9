#include "wadamp/modal.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wadamp/errors.hpp"

namespace wadamp::modal {

using lti::Complex;

std::vector<ModeInfo> extract_modes(const ident::MimoTfModel& model) {
    if (model.order < 1) throw ValidationError("extract_modes: model has no dynamics");
    auto roots = lti::poly_roots(model.denominator);

    std::vector<ModeInfo> modes;
    for (const auto& z : roots) {
        if (z.imag() < -1e-9) continue;  // conjugate partner carries the pair
        if (std::abs(z + 1.0) < 1e-9) {
            throw NumericalError("extract_modes: pole at z = -1 has no finite continuous image");
        }
        ModeInfo mode;
        mode.discrete_pole = z;
        mode.continuous_pole = lti::tustin_pole_d2c(z, model.sample_time);
        mode.frequency_hz = std::abs(mode.continuous_pole.imag()) / (2.0 * M_PI);
        const double mag = std::abs(mode.continuous_pole);
        mode.damping_ratio = mag > 0.0 ? -mode.continuous_pole.real() / mag : 0.0;
        modes.push_back(mode);
    }
    std::sort(modes.begin(), modes.end(), [](const ModeInfo& a, const ModeInfo& b) {
        if (a.frequency_hz != b.frequency_hz) return a.frequency_hz < b.frequency_hz;
        return a.continuous_pole.real() < b.continuous_pole.real();
    });
    return modes;
}

namespace {

// Continuous-domain residues of all loops at the mode pole.
Eigen::MatrixXcd raw_residues(const ident::MimoTfModel& model, const ModeInfo& mode) {
    const Eigen::Index m = model.n_outputs();
    const Eigen::Index p = model.n_inputs();
    Eigen::MatrixXcd raw = Eigen::MatrixXcd::Zero(m, p);
    const double match_tol = 1e-6 * (1.0 + std::abs(mode.continuous_pole));
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            auto tf = model.loop_tf(i, j);
            if (tf.num.is_zero()) continue;  // unexcited loop
            auto pf = lti::partial_fractions(lti::tustin_d2c(tf));
            bool found = false;
            for (const auto& term : pf.terms) {
                if (std::abs(term.pole - mode.continuous_pole) <= match_tol) {
                    raw(i, j) = term.residue;
                    found = true;
                    break;
                }
            }
            if (!found) {
                std::ostringstream os;
                os << "residue_table: mode pole " << mode.continuous_pole
                   << " not found in the denominator of loop (" << i << ", " << j << ")";
                throw ValidationError(os.str());
            }
        }
    }
    return raw;
}

bool pole_in_denominator(const ident::MimoTfModel& model, const ModeInfo& mode) {
    for (const auto& z : lti::poly_roots(model.denominator)) {
        if (std::abs(z - mode.discrete_pole) <= 1e-6 * (1.0 + std::abs(z))) return true;
    }
    return false;
}

}  // namespace

ModeInfo inter_area_mode(const ident::MimoTfModel& model, const std::vector<ModeInfo>& modes,
                         const FrequencyBand& band) {
    const ModeInfo* best = nullptr;
    double best_energy = -1.0;
    for (const auto& mode : modes) {
        if (mode.frequency_hz < band.lo_hz || mode.frequency_hz > band.hi_hz) continue;
        const double energy = raw_residues(model, mode).squaredNorm();
        if (energy > best_energy ||
            (energy == best_energy && best != nullptr &&
             mode.frequency_hz < best->frequency_hz)) {
            best = &mode;
            best_energy = energy;
        }
    }
    if (best == nullptr) {
        std::ostringstream os;
        os << "inter_area_mode: no mode in the " << band.lo_hz << "-" << band.hi_hz
           << " Hz band; identification likely failed";
        throw ValidationError(os.str());
    }
    return *best;
}

ResidueTable residue_table(const ident::MimoTfModel& model, const ModeInfo& mode) {
    if (!pole_in_denominator(model, mode)) {
        throw ValidationError("residue_table: mode pole does not belong to the model denominator");
    }
    ResidueTable table;
    table.mode = mode;
    table.output_names = model.output_names;
    table.input_names = model.input_names;
    table.raw = raw_residues(model, mode);
    table.raw_magnitude = table.raw.cwiseAbs();

    double max_mag = 0.0;
    for (Eigen::Index i = 0; i < table.raw_magnitude.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.raw_magnitude.cols(); ++j) {
            if (table.raw_magnitude(i, j) > max_mag) {
                max_mag = table.raw_magnitude(i, j);
                table.argmax_output = i;
                table.argmax_input = j;
            }
        }
    }
    if (max_mag <= 0.0) {
        throw ValidationError("residue_table: all residues vanish at this mode");
    }
    table.normalized = table.raw_magnitude / max_mag;
    table.normalized(table.argmax_output, table.argmax_input) = 1.0;
    return table;
}

std::pair<Eigen::Index, Eigen::Index> select_loop(const ResidueTable& table) {
    if (table.normalized.size() == 0) throw ValidationError("select_loop: empty residue table");
    Eigen::Index bi = 0, bj = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < table.normalized.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.normalized.cols(); ++j) {
            if (table.normalized(i, j) > best) {
                best = table.normalized(i, j);
                bi = i;
                bj = j;
            }
        }
    }
    return {bi, bj};
}

double fft_dominant_frequency(const DataWindow& window, const std::string& channel,
                              const FrequencyBand& band) {
    if (band.lo_hz <= 0.0 || band.hi_hz <= band.lo_hz) {
        throw ValidationError("fft_dominant_frequency: invalid band");
    }
    const double Ts = window.sample_time();
    const Eigen::Index N = window.size();
    if (static_cast<double>(N) * Ts < 2.0 / band.lo_hz - 1e-9) {
        throw ValidationError(
            "fft_dominant_frequency: window shorter than two cycles of the band's lower edge");
    }
    if (band.hi_hz >= 0.5 / Ts) {
        throw ValidationError("fft_dominant_frequency: band exceeds the Nyquist rate");
    }

    Eigen::VectorXd x = window.channel(channel);
    const double raw_scale = x.cwiseAbs().maxCoeff();
    x.array() -= x.mean();

    // Hann window, then zero-pad x8 for a finer interpolation grid.
    const Eigen::Index padded = 8 * N;
    std::vector<double> buf(static_cast<std::size_t>(padded), 0.0);
    for (Eigen::Index t = 0; t < N; ++t) {
        const double w =
            0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(t) / static_cast<double>(N - 1));
        buf[static_cast<std::size_t>(t)] = x(t) * w;
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, buf);

    const double df = 1.0 / (static_cast<double>(padded) * Ts);
    const Eigen::Index lo = static_cast<Eigen::Index>(std::ceil(band.lo_hz / df));
    const Eigen::Index hi = std::min<Eigen::Index>(
        static_cast<Eigen::Index>(std::floor(band.hi_hz / df)), padded / 2);

    Eigen::Index peak = -1;
    double peak_mag = 0.0;
    for (Eigen::Index i = lo; i <= hi; ++i) {
        const double mag = std::abs(spectrum[static_cast<std::size_t>(i)]);
        if (mag > peak_mag) {
            peak_mag = mag;
            peak = i;
        }
    }
    const double floor_mag = 1e-9 * static_cast<double>(N) * std::max(raw_scale, 1e-300);
    if (peak < 0 || peak_mag <= floor_mag) {
        throw NumericalError("fft_dominant_frequency: no in-band peak above the noise floor");
    }

    // Quadratic interpolation over the three bins around the peak.
    double refined = static_cast<double>(peak);
    if (peak > 0 && peak < padded / 2) {
        const double a = std::abs(spectrum[static_cast<std::size_t>(peak - 1)]);
        const double b = peak_mag;
        const double c = std::abs(spectrum[static_cast<std::size_t>(peak + 1)]);
        const double denom = a - 2.0 * b + c;
        if (denom < 0.0) refined += 0.5 * (a - c) / denom;
    }
    return refined * df;
}

}  // namespace wadamp::modal
