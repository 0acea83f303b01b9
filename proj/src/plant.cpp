#include "wadamp/plant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <random>

#include "wadamp/errors.hpp"

namespace wadamp::plant {

using lti::StateSpaceModel;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Parameter validation
// ---------------------------------------------------------------------------

void SwingSurrogateParams::validate() const {
    const int n = machine_count();
    if (n < 1) throw ValidationError("swing surrogate: need at least one machine");
    if (static_cast<int>(damping.size()) != n || static_cast<int>(input_gain.size()) != n) {
        throw ValidationError("swing surrogate: inertia/damping/input_gain lengths differ");
    }
    if (synchronizing.rows() != n || synchronizing.cols() != n) {
        throw ValidationError("swing surrogate: synchronizing matrix must be n x n");
    }
    for (int i = 0; i < n; ++i) {
        if (inertia[static_cast<std::size_t>(i)] <= 0.0) {
            throw ValidationError("swing surrogate: inertia must be positive");
        }
        if (damping[static_cast<std::size_t>(i)] < 0.0) {
            throw ValidationError("swing surrogate: damping must be nonnegative");
        }
    }
    const double scale = std::max(1.0, synchronizing.cwiseAbs().maxCoeff());
    if ((synchronizing - synchronizing.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw ValidationError("swing surrogate: synchronizing matrix must be symmetric");
    }
    if (synchronizing.rowwise().sum().cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw ValidationError(
            "swing surrogate: synchronizing matrix rows must sum to zero (angle-reference "
            "invariance)");
    }
    for (const auto& tie : tie_lines) {
        if (tie.name.empty()) throw ValidationError("swing surrogate: tie-line without a name");
        for (const auto& term : tie.terms) {
            if (term.from < 0 || term.from >= n || term.to < 0 || term.to >= n) {
                throw ValidationError("swing surrogate: tie-line '" + tie.name +
                                      "' references an unknown machine");
            }
        }
    }
}

std::vector<std::string> SwingSurrogateParams::input_names() const {
    std::vector<std::string> names;
    for (int i = 0; i < machine_count(); ++i) names.push_back("u_" + std::to_string(i + 1));
    return names;
}

std::vector<std::string> SwingSurrogateParams::output_names() const {
    std::vector<std::string> names;
    for (const auto& tie : tie_lines) names.push_back(tie.name);
    return names;
}

std::vector<std::string> SwingSurrogateParams::state_names() const {
    std::vector<std::string> names;
    for (int i = 0; i < machine_count(); ++i) names.push_back("delta_" + std::to_string(i + 1));
    for (int i = 0; i < machine_count(); ++i) names.push_back("omega_" + std::to_string(i + 1));
    return names;
}

void DisturbanceSpec::validate() const {
    if (duration <= 0.0) throw ValidationError("disturbance: duration must be positive");
    if (start < 0.0) throw ValidationError("disturbance: start must be nonnegative");
    if (input.empty()) throw ValidationError("disturbance: target input channel required");
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

StateSpaceModel build_coupled_example(const CoupledExampleParams& p) {
    if (p.a0 <= 0.0 || p.a1 <= 0.0 || p.a2 <= 0.0) {
        throw ValidationError("coupled example: coefficients must be strictly positive");
    }
    Eigen::MatrixXd A(4, 4), B(4, 2), C(2, 4);
    A << 0, 1, 0, 0,
        -p.a0, -p.a1, 0, -p.a0,
        0, 0, 0, 1,
        p.a2, 0, 0, -p.a2;
    B << 0, 0,
        1, 0,
        0, 0,
        0, 1;
    C << 1, 0, 0, 0,
        0, 0, 0, 1;
    return StateSpaceModel::continuous(A, B, C);
}

StateSpaceModel build_swing_surrogate(const SwingSurrogateParams& p) {
    p.validate();
    const int n = p.machine_count();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * n, n);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.tie_lines.size()), 2 * n);

    // delta_i' = omega_i
    // M_i omega_i' = -sum_j Ks(i,j) delta_j - D_i omega_i + b_i u_i
    for (int i = 0; i < n; ++i) {
        A(i, n + i) = 1.0;
        for (int j = 0; j < n; ++j) {
            A(n + i, j) = -p.synchronizing(i, j) / p.inertia[static_cast<std::size_t>(i)];
        }
        A(n + i, n + i) = -p.damping[static_cast<std::size_t>(i)] /
                          p.inertia[static_cast<std::size_t>(i)];
        B(n + i, i) = p.input_gain[static_cast<std::size_t>(i)] /
                      p.inertia[static_cast<std::size_t>(i)];
    }
    for (std::size_t t = 0; t < p.tie_lines.size(); ++t) {
        for (const auto& term : p.tie_lines[t].terms) {
            C(static_cast<Eigen::Index>(t), term.from) += term.weight;
            C(static_cast<Eigen::Index>(t), term.to) -= term.weight;
        }
    }
    return StateSpaceModel::continuous(A, B, C);
}

// ---------------------------------------------------------------------------
// Measurement chain
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> default_names(const std::string& stem, Eigen::Index count) {
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < count; ++i) names.push_back(stem + std::to_string(i + 1));
    return names;
}

Eigen::VectorXd disturbance_sequence(const DisturbanceSpec& spec, Eigen::Index n, double Ts,
                                     std::uint64_t seed) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    const double t_end = spec.start + spec.duration;
    switch (spec.kind) {
        case DisturbanceKind::Pulse:
            for (Eigen::Index i = 0; i < n; ++i) {
                double t = static_cast<double>(i) * Ts;
                if (t >= spec.start && t < t_end) u(i) = spec.amplitude;
            }
            break;
        case DisturbanceKind::Step:
            // A step holds to the end of the horizon; duration only gates
            // validation.
            for (Eigen::Index i = 0; i < n; ++i) {
                if (static_cast<double>(i) * Ts >= spec.start) u(i) = spec.amplitude;
            }
            break;
        case DisturbanceKind::FilteredNoise: {
            // One-pole low-pass driven by white noise, scaled to the requested
            // stationary standard deviation. Cutoff 2 Hz keeps the probe below
            // the decimated Nyquist rate of the shipped sampling plans.
            std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
            std::normal_distribution<double> gauss(0.0, 1.0);
            const double alpha = std::exp(-2.0 * M_PI * 2.0 * Ts);
            const double drive = spec.amplitude * std::sqrt(1.0 - alpha * alpha);
            double state = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                double t = static_cast<double>(i) * Ts;
                state = alpha * state + drive * gauss(rng);
                if (t >= spec.start && t < t_end) u(i) = state;
            }
            break;
        }
    }
    return u;
}

}  // namespace

DataWindow apply_disturbance(const StateSpaceModel& model, const DisturbanceSpec& spec,
                             double horizon, double sample_time, const ChannelNames& names,
                             std::uint64_t seed) {
    spec.validate();
    if (sample_time <= 0.0) throw ValidationError("apply_disturbance: sample_time must be positive");
    if (horizon < spec.start + spec.duration) {
        throw ValidationError("apply_disturbance: horizon shorter than the disturbance");
    }

    StateSpaceModel dmodel =
        model.is_discrete() ? model : lti::tustin_c2d_ss(model, sample_time);
    if (std::abs(*dmodel.sample_time - sample_time) > 1e-12) {
        throw ValidationError("apply_disturbance: model sample_time mismatch");
    }

    std::vector<std::string> in_names =
        names.inputs.empty() ? default_names("u_", model.n_inputs()) : names.inputs;
    std::vector<std::string> out_names =
        names.outputs.empty() ? default_names("y_", model.n_outputs()) : names.outputs;
    if (static_cast<Eigen::Index>(in_names.size()) != model.n_inputs() ||
        static_cast<Eigen::Index>(out_names.size()) != model.n_outputs()) {
        throw ValidationError("apply_disturbance: channel name count mismatch");
    }

    Eigen::Index target = -1;
    for (std::size_t i = 0; i < in_names.size(); ++i) {
        if (in_names[i] == spec.input) target = static_cast<Eigen::Index>(i);
    }
    if (target < 0) {
        throw ValidationError("apply_disturbance: unknown input channel '" + spec.input + "'");
    }

    const Eigen::Index N = static_cast<Eigen::Index>(std::floor(horizon / sample_time)) + 1;
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(N, model.n_inputs());
    U.col(target) = disturbance_sequence(spec, N, sample_time, seed);

    DataWindow inputs(sample_time, 0.0, in_names, U);
    DataWindow outputs = simulate_dt(dmodel, inputs, Eigen::VectorXd::Zero(dmodel.n_states()),
                                     out_names);

    Eigen::MatrixXd all(N, model.n_inputs() + model.n_outputs());
    all << U, outputs.data();
    std::vector<std::string> all_names = in_names;
    all_names.insert(all_names.end(), out_names.begin(), out_names.end());
    return DataWindow(sample_time, 0.0, all_names, all);
}

DataWindow measurement_channel(const DataWindow& raw, int decimation, double window_length,
                               double noise_std, const MeasureOptions& opts) {
    if (decimation < 1) throw ValidationError("measurement_channel: decimation must be >= 1");
    if (window_length <= 0.0) {
        throw ValidationError("measurement_channel: window_length must be positive");
    }
    const double Ts = raw.sample_time() * static_cast<double>(decimation);
    const double align = opts.align_start.value_or(raw.start_time());

    Eigen::Index first = static_cast<Eigen::Index>(
        std::ceil((align - raw.start_time()) / raw.sample_time() - 1e-9));
    first = std::max<Eigen::Index>(first, 0);
    const Eigen::Index count = static_cast<Eigen::Index>(std::llround(window_length / Ts));
    if (count < 1) throw ValidationError("measurement_channel: window too short for one sample");
    if (first + (count - 1) * decimation >= raw.size()) {
        throw ValidationError("measurement_channel: window longer than available data");
    }

    // Per-channel mean over raw samples strictly before the disturbance.
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(raw.channel_count());
    if (opts.mean_until && *opts.mean_until > raw.start_time()) {
        Eigen::Index m = static_cast<Eigen::Index>(
            std::ceil((*opts.mean_until - raw.start_time()) / raw.sample_time() - 1e-9));
        m = std::min(m, raw.size());
        if (m > 0) mean = raw.data().topRows(m).colwise().mean();
    }

    Eigen::MatrixXd out(count, raw.channel_count());
    for (Eigen::Index i = 0; i < count; ++i) {
        out.row(i) = raw.data().row(first + i * decimation) - mean;
    }
    if (noise_std > 0.0) {
        std::mt19937_64 rng(opts.noise_seed ^ 0xd1b54a32d192ed03ull);
        std::normal_distribution<double> gauss(0.0, noise_std);
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) += gauss(rng);
        }
    }
    return DataWindow(Ts, raw.time(first), raw.names(), std::move(out));
}

Eigen::Index delay_samples(double delay, double sample_time) {
    if (delay < 0.0) throw ValidationError("delay must be nonnegative");
    if (sample_time <= 0.0) throw ValidationError("delay: sample_time must be positive");
    return static_cast<Eigen::Index>(std::floor(delay / sample_time + 0.5));
}

DataWindow delay_block(const DataWindow& signal, double delay) {
    const Eigen::Index shift = delay_samples(delay, signal.sample_time());
    if (shift == 0) return signal;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(signal.size(), signal.channel_count());
    if (shift < signal.size()) {
        out.bottomRows(signal.size() - shift) = signal.data().topRows(signal.size() - shift);
    }
    return signal.with_data(std::move(out));
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

std::string preset_dir() {
    if (const char* env = std::getenv("WADAMP_PRESET_DIR")) return env;
#ifdef WADAMP_PRESET_DIR
    return WADAMP_PRESET_DIR;
#else
    return "presets";
#endif
}

namespace {

void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw ValidationError("preset " + where + ": unknown key '" + it.key() + "'");
        }
    }
}

SwingSurrogateParams parse_swing(const json& j) {
    require_keys(j, {"name", "type", "inherent_delay", "inertia", "damping", "input_gain",
                     "synchronizing", "tie_lines"},
                 "swing");
    SwingSurrogateParams p;
    p.inertia = j.at("inertia").get<std::vector<double>>();
    p.damping = j.at("damping").get<std::vector<double>>();
    p.input_gain = j.at("input_gain").get<std::vector<double>>();
    auto rows = j.at("synchronizing").get<std::vector<std::vector<double>>>();
    const int n = p.machine_count();
    p.synchronizing = Eigen::MatrixXd::Zero(n, n);
    if (static_cast<int>(rows.size()) != n) {
        throw ValidationError("preset: synchronizing row count mismatch");
    }
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n) {
            throw ValidationError("preset: synchronizing column count mismatch");
        }
        for (int k = 0; k < n; ++k) {
            p.synchronizing(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        }
    }
    for (const auto& tj : j.at("tie_lines")) {
        TieLine tie;
        tie.name = tj.at("name").get<std::string>();
        for (const auto& term : tj.at("terms")) {
            tie.terms.push_back({term.at(0).get<int>(), term.at(1).get<int>(),
                                 term.at(2).get<double>()});
        }
        p.tie_lines.push_back(std::move(tie));
    }
    p.validate();
    return p;
}

}  // namespace

PlantPreset load_preset(const std::string& name_or_path) {
    std::string path = name_or_path;
    const bool is_path = name_or_path.find('/') != std::string::npos ||
                         name_or_path.ends_with(".json");
    if (!is_path) path = preset_dir() + "/" + name_or_path + ".json";

    std::ifstream in(path);
    if (!in) throw IoError("cannot open plant preset file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("malformed preset JSON in '" + path + "': " + std::string(e.what()));
    }

    PlantPreset preset;
    try {
        preset.name = j.value("name", name_or_path);
        preset.inherent_delay = j.value("inherent_delay", 0.0);
        const std::string type = j.at("type").get<std::string>();
        if (type == "swing") {
            preset.swing = parse_swing(j);
        } else if (type == "coupled") {
            require_keys(j, {"name", "type", "inherent_delay", "a0", "a1", "a2"}, "coupled");
            preset.coupled = CoupledExampleParams{j.at("a0").get<double>(),
                                                  j.at("a1").get<double>(),
                                                  j.at("a2").get<double>()};
        } else {
            throw ValidationError("preset: unknown plant type '" + type + "'");
        }
    } catch (const json::exception& e) {
        throw ValidationError("preset '" + path + "': " + std::string(e.what()));
    }
    return preset;
}

StateSpaceModel PlantPreset::build() const {
    if (swing) return build_swing_surrogate(*swing);
    if (coupled) return build_coupled_example(*coupled);
    throw ValidationError("preset: no plant definition");
}

ChannelNames PlantPreset::channel_names() const {
    if (swing) return {swing->input_names(), swing->output_names()};
    return {{"u_1", "u_2"}, {"y_1", "y_2"}};
}

std::vector<std::string> PlantPreset::state_names() const {
    if (swing) return swing->state_names();
    return {"x_1", "x_2", "x_3", "x_4"};
}

}  // namespace wadamp::plant
