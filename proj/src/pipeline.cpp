#include "wadamp/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wadamp/csv.hpp"
#include "wadamp/errors.hpp"
#include "wadamp/metrics.hpp"

namespace wadamp::pipeline {

using nlohmann::json;

namespace {

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) {
            throw ValidationError("matrix_from_json: ragged rows");
        }
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        }
    }
    return m;
}

struct Context {
    PipelineConfig config;
    plant::PlantPreset preset;
    lti::StateSpaceModel plant_model{Eigen::MatrixXd(), Eigen::MatrixXd(), Eigen::MatrixXd(),
                                     Eigen::MatrixXd(), std::nullopt};
    plant::ChannelNames names;
    double decimated_ts = 0.0;
    std::vector<DataWindow> measured;
    RunReport report;
};

std::filesystem::path out_path(const Context& ctx, const std::string& file) {
    return std::filesystem::path(ctx.config.output_dir) / file;
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

void stage_simulate(Context& ctx) {
    ctx.preset = plant::load_preset(ctx.config.plant);
    ctx.plant_model = ctx.preset.build();
    ctx.names = ctx.preset.channel_names();
    if (ctx.names.outputs.empty()) {
        throw ValidationError("pipeline: plant preset has no outputs to measure");
    }
    ctx.decimated_ts =
        ctx.config.sampling.raw_sample_time * static_cast<double>(ctx.config.sampling.decimation);

    std::vector<plant::DisturbanceSpec> experiments = ctx.config.experiments;
    if (experiments.empty()) {
        // Default protocol: one pulse per input, identical timing.
        for (const auto& input : ctx.names.inputs) {
            plant::DisturbanceSpec spec;
            spec.kind = plant::DisturbanceKind::Pulse;
            spec.input = input;
            spec.start = 1.024;
            spec.duration = 0.064;
            spec.amplitude = 0.05;
            experiments.push_back(spec);
        }
    }

    ctx.measured.clear();
    for (std::size_t e = 0; e < experiments.size(); ++e) {
        const auto& spec = experiments[e];
        const double align = std::max(0.0, spec.start - ctx.config.sampling.lead);
        const double horizon = align + ctx.config.sampling.window_length + 2.0 * ctx.decimated_ts;
        auto raw = plant::apply_disturbance(ctx.plant_model, spec, horizon,
                                            ctx.config.sampling.raw_sample_time, ctx.names,
                                            ctx.config.seed + e);
        plant::MeasureOptions opts;
        opts.align_start = align;
        opts.mean_until = spec.start;
        opts.noise_seed = ctx.config.seed * 1000003ull + e;
        auto window = plant::measurement_channel(raw, ctx.config.sampling.decimation,
                                                 ctx.config.sampling.window_length,
                                                 ctx.config.sampling.noise_std, opts);
        csv_export(window, out_path(ctx, "ringdown_" + spec.input + ".csv").string());
        ctx.measured.push_back(std::move(window));
    }
}

void stage_identify(Context& ctx) {
    auto data =
        ident::ExperimentSet::from_windows(ctx.measured, ctx.names.inputs, ctx.names.outputs);
    ident::IdentOptions opts;
    opts.max_iterations = ctx.config.identification.max_iterations;
    opts.objective_tolerance = ctx.config.identification.objective_tolerance;
    opts.stability_margin = ctx.config.identification.stability_margin;

    const auto& candidates = ctx.config.identification.order_candidates;
    int order = candidates.front();
    if (candidates.size() > 1) {
        order = ident::select_order(data, candidates, opts).order;
    }
    auto [model, fit] = ident::identify(data, order, opts);
    ctx.report.model = std::move(model);
    ctx.report.fit = std::move(fit);
    ctx.report.chosen_order = order;

    std::ofstream out(out_path(ctx, "model.json"));
    if (!out) throw IoError("pipeline: cannot write model.json");
    out << model_to_json(ctx.report.model).dump(2) << "\n";
}

void stage_modes(Context& ctx) {
    ctx.report.modes = modal::extract_modes(ctx.report.model);
    ctx.report.inter_area =
        modal::inter_area_mode(ctx.report.model, ctx.report.modes, ctx.config.mode_band);
    ctx.report.fft_frequency = modal::fft_dominant_frequency(
        ctx.measured.front(), ctx.names.outputs.front(), ctx.config.mode_band);

    std::ofstream out(out_path(ctx, "modes.csv"));
    if (!out) throw IoError("pipeline: cannot write modes.csv");
    out << "frequency_hz,damping_ratio,z_re,z_im,s_re,s_im\n";
    for (const auto& m : ctx.report.modes) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.frequency_hz,
                      m.damping_ratio, m.discrete_pole.real(), m.discrete_pole.imag(),
                      m.continuous_pole.real(), m.continuous_pole.imag());
        out << buf;
    }
}

void stage_select_loop(Context& ctx) {
    ctx.report.residues = modal::residue_table(ctx.report.model, ctx.report.inter_area);
    auto [m, p] = modal::select_loop(ctx.report.residues);
    ctx.report.selected_output = ctx.names.outputs[static_cast<std::size_t>(m)];
    ctx.report.selected_input = ctx.names.inputs[static_cast<std::size_t>(p)];

    std::ofstream out(out_path(ctx, "residues.csv"));
    if (!out) throw IoError("pipeline: cannot write residues.csv");
    out << "output";
    for (const auto& name : ctx.report.residues.input_names) out << "," << name;
    out << "\n";
    for (Eigen::Index i = 0; i < ctx.report.residues.normalized.rows(); ++i) {
        out << ctx.report.residues.output_names[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < ctx.report.residues.normalized.cols(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), ",%.17g", ctx.report.residues.normalized(i, j));
            out << buf;
        }
        out << "\n";
    }
}

void stage_design(Context& ctx) {
    const auto& table = ctx.report.residues;
    wadc::WadcDesign design;
    design.output_index = table.argmax_output;
    design.input_index = table.argmax_input;
    design.realization = lti::tf_to_ss_controllable(
        ctx.report.model.loop_tf(table.argmax_output, table.argmax_input));
    design.dlqr = wadc::dlqr_for_loop(design.realization, ctx.config.controller.rho,
                                      ctx.config.controller.riccati_tolerance,
                                      ctx.config.controller.riccati_max_iterations);

    const Eigen::Index n = design.realization.n_states();
    design.kalman.estimate = Eigen::VectorXd::Zero(n);
    design.kalman.covariance = Eigen::MatrixXd::Identity(n, n);
    design.kalman.process_noise =
        ctx.config.controller.process_noise * Eigen::MatrixXd::Identity(n, n);
    design.kalman.measurement_noise =
        ctx.config.controller.measurement_noise * Eigen::MatrixXd::Identity(1, 1);
    design.kalman.observation = design.realization.C;
    design.output_limit = ctx.config.controller.saturation;
    design.loop_delay = ctx.config.controller.delay.value_or(ctx.preset.inherent_delay);
    ctx.report.design = std::move(design);

    std::ofstream out(out_path(ctx, "design.json"));
    if (!out) throw IoError("pipeline: cannot write design.json");
    out << design_to_json(ctx.report.design, ctx.report.selected_output,
                          ctx.report.selected_input)
               .dump(2)
        << "\n";
}

plant::DisturbanceSpec evaluation_disturbance(const Context& ctx) {
    if (ctx.config.evaluation.disturbance) return *ctx.config.evaluation.disturbance;
    plant::DisturbanceSpec spec;
    spec.kind = plant::DisturbanceKind::Pulse;
    spec.input = ctx.names.inputs.front();
    spec.start = 1.024;
    spec.duration = 0.064;
    spec.amplitude = 0.05;
    return spec;
}

wadc::SimOptions evaluation_sim_options(const Context& ctx) {
    wadc::SimOptions opts;
    opts.measurement_noise_std = ctx.config.evaluation.measurement_noise;
    opts.input_names = ctx.names.inputs;
    opts.output_names = ctx.names.outputs;
    opts.state_names = ctx.preset.state_names();
    return opts;
}

DataWindow run_closed_loop(const Context& ctx, const wadc::WadcDesign& design, bool enabled) {
    auto opts = evaluation_sim_options(ctx);
    opts.controller_enabled = enabled && ctx.config.controller.enabled;
    return wadc::closed_loop_sim(ctx.plant_model, design, evaluation_disturbance(ctx),
                                 ctx.config.evaluation.horizon, ctx.config.seed, opts);
}

void stage_evaluate(Context& ctx) {
    auto with = run_closed_loop(ctx, ctx.report.design, true);
    auto without = run_closed_loop(ctx, ctx.report.design, false);
    csv_export(with, out_path(ctx, "trace_with_wadc.csv").string());
    csv_export(without, out_path(ctx, "trace_without_wadc.csv").string());

    const auto spec = evaluation_disturbance(ctx);
    const double from = ctx.config.evaluation.auc_from.value_or(spec.start);
    const double to =
        ctx.config.evaluation.auc_to.value_or(with.time(with.size() - 1));

    // Per-channel rows for the tie-line outputs and machine speeds, then
    // aggregates used by the headline damping comparison.
    std::vector<std::string> channels = ctx.names.outputs;
    for (const auto& name : ctx.preset.state_names()) {
        if (name.rfind("omega_", 0) == 0) channels.push_back(name);
    }
    double sum_dp_with = 0.0, sum_dp_without = 0.0;
    double sum_om_with = 0.0, sum_om_without = 0.0;
    ctx.report.metrics.clear();
    for (const auto& ch : channels) {
        ChannelMetrics row;
        row.channel = ch;
        row.auc_with = metric_auc(with, ch, from, to);
        row.auc_without = metric_auc(without, ch, from, to);
        row.reduction_percent =
            row.auc_without > 0.0 ? 100.0 * (1.0 - row.auc_with / row.auc_without) : 0.0;
        if (ch.rfind("omega_", 0) == 0) {
            sum_om_with += row.auc_with;
            sum_om_without += row.auc_without;
        } else {
            sum_dp_with += row.auc_with;
            sum_dp_without += row.auc_without;
        }
        ctx.report.metrics.push_back(row);
    }
    auto aggregate = [](std::string name, double w, double wo) {
        ChannelMetrics row;
        row.channel = std::move(name);
        row.auc_with = w;
        row.auc_without = wo;
        row.reduction_percent = wo > 0.0 ? 100.0 * (1.0 - w / wo) : 0.0;
        return row;
    };
    ctx.report.metrics.push_back(aggregate("total_dP", sum_dp_with, sum_dp_without));
    if (sum_om_without > 0.0) {
        ctx.report.metrics.push_back(aggregate("total_omega", sum_om_with, sum_om_without));
    }

    ctx.report.peaks.clear();
    for (const auto& p : ctx.config.evaluation.peaks) {
        PeakMetrics row;
        row.channel = p.channel;
        row.time = p.time;
        row.peak_with = metric_peak(with, p.channel, p.time);
        row.peak_without = metric_peak(without, p.channel, p.time);
        row.reduction_percent =
            row.peak_without > 0.0 ? 100.0 * (1.0 - row.peak_with / row.peak_without) : 0.0;
        ctx.report.peaks.push_back(row);
    }
}

void stage_delay_sweep(Context& ctx) {
    std::vector<double> delays = ctx.config.delay_sweep;
    std::sort(delays.begin(), delays.end());
    const double inherent = ctx.report.design.loop_delay;
    const auto spec = evaluation_disturbance(ctx);
    const double from = ctx.config.evaluation.auc_from.value_or(spec.start);

    std::vector<DataWindow> traces;
    for (double extra : delays) {
        auto design = ctx.report.design;
        design.loop_delay = inherent + extra;
        auto trace = run_closed_loop(ctx, design, true);
        char name[64];
        std::snprintf(name, sizeof(name), "trace_delay_%gms.csv", extra * 1000.0);
        csv_export(trace, out_path(ctx, name).string());
        traces.push_back(std::move(trace));
    }

    const Eigen::VectorXd reference = traces.front().channel(ctx.report.selected_output);
    ctx.report.delay_table.clear();
    for (std::size_t i = 0; i < delays.size(); ++i) {
        DelayRow row;
        row.delay = delays[i];
        row.relative_error =
            metric_relative_error(reference, traces[i].channel(ctx.report.selected_output));
        row.auc = metric_auc(traces[i], ctx.report.selected_output, from,
                             traces[i].time(traces[i].size() - 1));
        ctx.report.delay_table.push_back(row);
    }

    std::ofstream out(out_path(ctx, "delay_sweep.csv"));
    if (!out) throw IoError("pipeline: cannot write delay_sweep.csv");
    out << "delay_s,relative_error,auc\n";
    for (const auto& row : ctx.report.delay_table) {
        char buf[120];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", row.delay, row.relative_error,
                      row.auc);
        out << buf;
    }
}

void write_report(const Context& ctx) {
    std::ofstream txt(out_path(ctx, "report.txt"));
    if (!txt) throw IoError("pipeline: cannot write report.txt");
    txt << ctx.report.text();

    std::ofstream js(out_path(ctx, "report.json"));
    if (!js) throw IoError("pipeline: cannot write report.json");
    js << ctx.report.to_json().dump(2) << "\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

RunReport run_pipeline(const PipelineConfig& config, Stage stage) {
    config.validate();
    Context ctx;
    ctx.config = config;
    std::filesystem::create_directories(config.output_dir);
    ctx.report.preset = config.plant;
    ctx.report.seed = config.seed;
    ctx.report.config_hash = config_hash(config);
    ctx.report.timestamp = iso_timestamp();

    stage_simulate(ctx);
    if (stage >= Stage::Identify) stage_identify(ctx);
    if (stage >= Stage::Modes) stage_modes(ctx);
    if (stage >= Stage::SelectLoop) stage_select_loop(ctx);
    if (stage >= Stage::Design) stage_design(ctx);
    if (stage >= Stage::Evaluate) stage_evaluate(ctx);
    if (stage >= Stage::DelaySweep) stage_delay_sweep(ctx);
    if (stage >= Stage::Evaluate) write_report(ctx);
    return ctx.report;
}

std::vector<DelayRow> delay_sweep(const PipelineConfig& config,
                                  const std::vector<double>& delays) {
    PipelineConfig c = config;
    if (!delays.empty()) c.delay_sweep = delays;
    return run_pipeline(c, Stage::DelaySweep).delay_table;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

json model_to_json(const ident::MimoTfModel& model) {
    json j;
    j["sample_time"] = model.sample_time;
    j["order"] = model.order;
    j["outputs"] = model.output_names;
    j["inputs"] = model.input_names;
    j["denominator"] = model.denominator.coeffs();
    json nums = json::array();
    for (const auto& row : model.numerators) {
        json r = json::array();
        for (const auto& num : row) r.push_back(num.coeffs());
        nums.push_back(r);
    }
    j["numerators"] = nums;
    return j;
}

ident::MimoTfModel model_from_json(const json& j) {
    ident::MimoTfModel model;
    model.sample_time = j.at("sample_time").get<double>();
    model.order = j.at("order").get<int>();
    model.output_names = j.at("outputs").get<std::vector<std::string>>();
    model.input_names = j.at("inputs").get<std::vector<std::string>>();
    model.denominator = lti::Polynomial(j.at("denominator").get<std::vector<double>>());
    for (const auto& row : j.at("numerators")) {
        std::vector<lti::Polynomial> r;
        for (const auto& num : row) r.push_back(lti::Polynomial(num.get<std::vector<double>>()));
        model.numerators.push_back(std::move(r));
    }
    if (model.numerators.size() != model.output_names.size()) {
        throw ValidationError("model_from_json: numerator grid does not match outputs");
    }
    return model;
}

json design_to_json(const wadc::WadcDesign& design, const std::string& output_name,
                    const std::string& input_name) {
    json j;
    j["loop"] = {{"output", output_name},
                 {"input", input_name},
                 {"output_index", design.output_index},
                 {"input_index", design.input_index}};
    j["realization"] = {{"A", matrix_to_json(design.realization.A)},
                        {"B", matrix_to_json(design.realization.B)},
                        {"C", matrix_to_json(design.realization.C)},
                        {"D", matrix_to_json(design.realization.D)},
                        {"sample_time", *design.realization.sample_time}};
    j["dlqr"] = {{"gain", matrix_to_json(design.dlqr.gain)},
                 {"riccati", matrix_to_json(design.dlqr.riccati)},
                 {"rho", design.dlqr.rho},
                 {"iterations", design.dlqr.iterations},
                 {"residual", design.dlqr.residual}};
    j["kalman"] = {{"process_noise", matrix_to_json(design.kalman.process_noise)},
                   {"measurement_noise", matrix_to_json(design.kalman.measurement_noise)}};
    j["saturation"] = design.output_limit ? json(*design.output_limit) : json(nullptr);
    j["loop_delay"] = design.loop_delay;
    return j;
}

wadc::WadcDesign design_from_json(const json& j) {
    wadc::WadcDesign design;
    design.output_index = j.at("loop").at("output_index").get<Eigen::Index>();
    design.input_index = j.at("loop").at("input_index").get<Eigen::Index>();
    const auto& r = j.at("realization");
    design.realization = lti::StateSpaceModel::discrete(
        matrix_from_json(r.at("A")), matrix_from_json(r.at("B")), matrix_from_json(r.at("C")),
        matrix_from_json(r.at("D")), r.at("sample_time").get<double>());
    design.dlqr.gain = matrix_from_json(j.at("dlqr").at("gain"));
    design.dlqr.riccati = matrix_from_json(j.at("dlqr").at("riccati"));
    design.dlqr.rho = j.at("dlqr").at("rho").get<double>();
    design.kalman.process_noise = matrix_from_json(j.at("kalman").at("process_noise"));
    design.kalman.measurement_noise = matrix_from_json(j.at("kalman").at("measurement_noise"));
    design.kalman.observation = design.realization.C;
    design.kalman.estimate = Eigen::VectorXd::Zero(design.realization.n_states());
    design.kalman.covariance =
        Eigen::MatrixXd::Identity(design.realization.n_states(), design.realization.n_states());
    if (!j.at("saturation").is_null()) design.output_limit = j.at("saturation").get<double>();
    design.loop_delay = j.at("loop_delay").get<double>();
    return design;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

std::string RunReport::text() const {
    std::ostringstream os;
    os << "wadamp run report\n";
    os << "=================\n";
    os << "preset: " << preset << "    seed: " << seed << "    config: fnv1a:" << config_hash
       << "\n";
    os << "timestamp: " << timestamp << "\n\n";

    os << "Identified model: order " << chosen_order << ", sample time "
       << fmt(model.sample_time) << " s, " << fit.loops.size() << " loops, "
       << (fit.converged ? "converged" : "NOT converged") << " after " << fit.iterations
       << " iterations\n";
    os << "  equation-error LS condition number: " << fmt(fit.condition_number) << "\n";
    os << "  denominator:";
    for (double c : model.denominator.coeffs()) os << " " << fmt(c, "%.8g");
    os << "\n";
    for (const auto& w : fit.warnings) os << "  warning: " << w << "\n";
    os << "\n";

    os << "Modes:\n";
    os << "  f [Hz]      zeta        z-pole                    s-pole\n";
    for (const auto& m : modes) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "  %-11.6g %-11.6g %.6g%+.6gi %18.6g%+.6gi\n",
                      m.frequency_hz, m.damping_ratio, m.discrete_pole.real(),
                      m.discrete_pole.imag(), m.continuous_pole.real(),
                      m.continuous_pole.imag());
        os << buf;
    }
    os << "Inter-area mode: " << fmt(inter_area.frequency_hz) << " Hz (zeta "
       << fmt(inter_area.damping_ratio) << "); FFT cross-check: " << fmt(fft_frequency)
       << " Hz (difference " << fmt(std::abs(inter_area.frequency_hz - fft_frequency)) << ")\n\n";

    os << "Normalized residue table (mode " << fmt(inter_area.frequency_hz) << " Hz):\n";
    os << "  output/input";
    for (const auto& name : residues.input_names) os << "  " << name;
    os << "\n";
    for (Eigen::Index i = 0; i < residues.normalized.rows(); ++i) {
        os << "  " << residues.output_names[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < residues.normalized.cols(); ++j) {
            os << "  " << fmt(residues.normalized(i, j), "%.5g");
        }
        os << "\n";
    }
    os << "Selected loop: " << selected_output << " <- " << selected_input << "\n\n";

    os << "DLQR gain (rho = " << fmt(design.dlqr.rho) << "):";
    for (Eigen::Index i = 0; i < design.dlqr.gain.cols(); ++i) {
        os << " " << fmt(design.dlqr.gain(0, i), "%.6g");
    }
    os << "\nLoop delay: " << fmt(design.loop_delay) << " s";
    if (design.output_limit) os << ", output limit: " << fmt(*design.output_limit) << " pu";
    os << "\n\n";

    if (!metrics.empty()) {
        os << "Area under |signal| (with vs without WADC):\n";
        os << "  channel        without        with           reduction\n";
        for (const auto& m : metrics) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "  %-14s %-14.8g %-14.8g %.4g%%\n", m.channel.c_str(),
                          m.auc_without, m.auc_with, m.reduction_percent);
            os << buf;
        }
        os << "\n";
    }
    if (!peaks.empty()) {
        os << "Peaks:\n";
        for (const auto& p : peaks) {
            os << "  " << p.channel << " @ " << fmt(p.time) << " s: " << fmt(p.peak_without)
               << " -> " << fmt(p.peak_with) << " (" << fmt(p.reduction_percent, "%.4g")
               << "%)\n";
        }
        os << "\n";
    }
    if (!delay_table.empty()) {
        os << "Delay sweep (relative error vs minimal-delay run, channel " << selected_output
           << "):\n";
        os << "  extra delay [s]   relative error   AUC\n";
        for (const auto& row : delay_table) {
            char buf[120];
            std::snprintf(buf, sizeof(buf), "  %-17.6g %-16.8g %.8g\n", row.delay,
                          row.relative_error, row.auc);
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

json RunReport::to_json() const {
    json j;
    j["preset"] = preset;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["timestamp"] = timestamp;
    j["model"] = model_to_json(model);
    j["fit"] = {{"converged", fit.converged},
                {"iterations", fit.iterations},
                {"condition_number", fit.condition_number},
                {"objective_initial", fit.objective_initial},
                {"objective_final", fit.objective_final},
                {"warnings", fit.warnings}};
    json loop_errors = json::array();
    for (std::size_t i = 0; i < fit.loops.size(); ++i) {
        loop_errors.push_back({{"output", fit.loops[i].first},
                               {"input", fit.loops[i].second},
                               {"normalized_error", fit.loop_errors[i]}});
    }
    j["fit"]["loop_errors"] = loop_errors;

    json modes_json = json::array();
    for (const auto& m : modes) {
        modes_json.push_back({{"frequency_hz", m.frequency_hz},
                              {"damping_ratio", m.damping_ratio},
                              {"z", {m.discrete_pole.real(), m.discrete_pole.imag()}},
                              {"s", {m.continuous_pole.real(), m.continuous_pole.imag()}}});
    }
    j["modes"] = modes_json;
    j["inter_area_mode"] = {{"frequency_hz", inter_area.frequency_hz},
                            {"damping_ratio", inter_area.damping_ratio}};
    j["fft_frequency_hz"] = fft_frequency;

    json residues_json;
    residues_json["outputs"] = residues.output_names;
    residues_json["inputs"] = residues.input_names;
    residues_json["normalized"] = matrix_to_json(residues.normalized);
    residues_json["raw_magnitude"] = matrix_to_json(residues.raw_magnitude);
    j["residues"] = residues_json;
    j["selected_loop"] = {{"output", selected_output}, {"input", selected_input}};

    j["design"] = design_to_json(design, selected_output, selected_input);

    json metrics_json = json::array();
    for (const auto& m : metrics) {
        metrics_json.push_back({{"channel", m.channel},
                                {"auc_without", m.auc_without},
                                {"auc_with", m.auc_with},
                                {"reduction_percent", m.reduction_percent}});
    }
    j["auc"] = metrics_json;
    json peaks_json = json::array();
    for (const auto& p : peaks) {
        peaks_json.push_back({{"channel", p.channel},
                              {"time", p.time},
                              {"peak_without", p.peak_without},
                              {"peak_with", p.peak_with},
                              {"reduction_percent", p.reduction_percent}});
    }
    j["peaks"] = peaks_json;
    json delays_json = json::array();
    for (const auto& row : delay_table) {
        delays_json.push_back({{"delay_s", row.delay},
                               {"relative_error", row.relative_error},
                               {"auc", row.auc}});
    }
    j["delay_sweep"] = delays_json;
    return j;
}

}  // namespace wadamp::pipeline
