#include "wadamp/config.hpp"

#include <algorithm>
#include <fstream>

#include "wadamp/errors.hpp"

namespace wadamp::pipeline {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
    if (!j.is_object()) throw ValidationError("config: '" + where + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw ValidationError("config: unknown key '" + where + "." + it.key() + "'");
        }
    }
}

plant::DisturbanceKind kind_from_string(const std::string& s) {
    if (s == "pulse") return plant::DisturbanceKind::Pulse;
    if (s == "step") return plant::DisturbanceKind::Step;
    if (s == "filtered-noise") return plant::DisturbanceKind::FilteredNoise;
    throw ValidationError("config: unknown disturbance kind '" + s + "'");
}

std::string kind_to_string(plant::DisturbanceKind k) {
    switch (k) {
        case plant::DisturbanceKind::Pulse: return "pulse";
        case plant::DisturbanceKind::Step: return "step";
        case plant::DisturbanceKind::FilteredNoise: return "filtered-noise";
    }
    return "pulse";
}

plant::DisturbanceSpec disturbance_from_json(const json& j, const std::string& where) {
    reject_unknown(j, {"kind", "input", "start", "duration", "amplitude"}, where);
    plant::DisturbanceSpec spec;
    spec.kind = kind_from_string(j.value("kind", "pulse"));
    spec.input = j.at("input").get<std::string>();
    spec.start = j.value("start", 1.024);
    spec.duration = j.value("duration", 0.064);
    spec.amplitude = j.value("amplitude", 0.05);
    return spec;
}

json disturbance_to_json(const plant::DisturbanceSpec& spec) {
    return json{{"kind", kind_to_string(spec.kind)},
                {"input", spec.input},
                {"start", spec.start},
                {"duration", spec.duration},
                {"amplitude", spec.amplitude}};
}

}  // namespace

void PipelineConfig::validate() const {
    if (plant.empty()) throw ValidationError("config: 'plant' is required");
    if (sampling.raw_sample_time <= 0.0 || sampling.window_length <= 0.0) {
        throw ValidationError("config: sampling durations must be positive");
    }
    if (sampling.decimation < 1) throw ValidationError("config: decimation must be >= 1");
    if (sampling.lead < 0.0) throw ValidationError("config: sampling.lead must be nonnegative");
    if (identification.order_candidates.empty()) {
        throw ValidationError("config: identification.order_candidates must be nonempty");
    }
    for (int k : identification.order_candidates) {
        if (k < 1) throw ValidationError("config: model order must be >= 1");
    }
    const double nyquist =
        0.5 / (sampling.raw_sample_time * static_cast<double>(sampling.decimation));
    if (mode_band.lo_hz <= 0.0 || mode_band.hi_hz <= mode_band.lo_hz ||
        mode_band.hi_hz >= nyquist) {
        throw ValidationError("config: mode_band must lie inside (0, Nyquist)");
    }
    if (controller.rho <= 0.0) throw ValidationError("config: controller.rho must be positive");
    if (controller.process_noise < 0.0 || controller.measurement_noise <= 0.0) {
        throw ValidationError("config: controller noise covariances invalid");
    }
    if (controller.riccati_tolerance <= 0.0 || controller.riccati_max_iterations < 1) {
        throw ValidationError("config: controller Riccati settings invalid");
    }
    if (evaluation.horizon <= 0.0) throw ValidationError("config: evaluation.horizon invalid");
    if (delay_sweep.empty()) throw ValidationError("config: delay_sweep must be nonempty");
    for (double d : delay_sweep) {
        if (d < 0.0) throw ValidationError("config: delays must be nonnegative");
    }
    for (const auto& e : experiments) e.validate();
    if (evaluation.disturbance) evaluation.disturbance->validate();
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    reject_unknown(j,
                   {"plant", "experiments", "sampling", "identification", "mode_band",
                    "controller", "evaluation", "delay_sweep", "output_dir", "seed"},
                   "<root>");
    PipelineConfig c;
    c.plant = j.at("plant").get<std::string>();

    if (j.contains("experiments")) {
        for (const auto& e : j.at("experiments")) {
            c.experiments.push_back(disturbance_from_json(e, "experiments[]"));
        }
    }
    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        reject_unknown(s, {"raw_sample_time", "decimation", "window_length", "noise_std", "lead"},
                       "sampling");
        c.sampling.raw_sample_time = s.value("raw_sample_time", c.sampling.raw_sample_time);
        c.sampling.decimation = s.value("decimation", c.sampling.decimation);
        c.sampling.window_length = s.value("window_length", c.sampling.window_length);
        c.sampling.noise_std = s.value("noise_std", c.sampling.noise_std);
        c.sampling.lead = s.value("lead", c.sampling.lead);
    }
    if (j.contains("identification")) {
        const auto& s = j.at("identification");
        reject_unknown(s, {"order", "order_candidates", "max_iterations", "objective_tolerance",
                           "stability_margin"},
                       "identification");
        if (s.contains("order") && s.contains("order_candidates")) {
            throw ValidationError("config: give either identification.order or order_candidates");
        }
        if (s.contains("order")) {
            c.identification.order_candidates = {s.at("order").get<int>()};
        } else if (s.contains("order_candidates")) {
            c.identification.order_candidates =
                s.at("order_candidates").get<std::vector<int>>();
        }
        c.identification.max_iterations =
            s.value("max_iterations", c.identification.max_iterations);
        c.identification.objective_tolerance =
            s.value("objective_tolerance", c.identification.objective_tolerance);
        c.identification.stability_margin =
            s.value("stability_margin", c.identification.stability_margin);
    }
    if (j.contains("mode_band")) {
        const auto& b = j.at("mode_band");
        if (!b.is_array() || b.size() != 2) {
            throw ValidationError("config: mode_band must be [lo_hz, hi_hz]");
        }
        c.mode_band.lo_hz = b.at(0).get<double>();
        c.mode_band.hi_hz = b.at(1).get<double>();
    }
    if (j.contains("controller")) {
        const auto& s = j.at("controller");
        reject_unknown(s, {"enabled", "rho", "process_noise", "measurement_noise", "saturation",
                           "delay", "riccati_tolerance", "riccati_max_iterations"},
                       "controller");
        c.controller.enabled = s.value("enabled", c.controller.enabled);
        c.controller.rho = s.value("rho", c.controller.rho);
        c.controller.process_noise = s.value("process_noise", c.controller.process_noise);
        c.controller.measurement_noise =
            s.value("measurement_noise", c.controller.measurement_noise);
        if (s.contains("saturation")) {
            if (s.at("saturation").is_null()) {
                c.controller.saturation.reset();
            } else {
                c.controller.saturation = s.at("saturation").get<double>();
            }
        }
        if (s.contains("delay")) c.controller.delay = s.at("delay").get<double>();
        c.controller.riccati_tolerance =
            s.value("riccati_tolerance", c.controller.riccati_tolerance);
        c.controller.riccati_max_iterations =
            s.value("riccati_max_iterations", c.controller.riccati_max_iterations);
    }
    if (j.contains("evaluation")) {
        const auto& s = j.at("evaluation");
        reject_unknown(s, {"disturbance", "horizon", "measurement_noise", "auc_from", "auc_to",
                           "peaks"},
                       "evaluation");
        if (s.contains("disturbance")) {
            c.evaluation.disturbance =
                disturbance_from_json(s.at("disturbance"), "evaluation.disturbance");
        }
        c.evaluation.horizon = s.value("horizon", c.evaluation.horizon);
        c.evaluation.measurement_noise =
            s.value("measurement_noise", c.evaluation.measurement_noise);
        if (s.contains("auc_from")) c.evaluation.auc_from = s.at("auc_from").get<double>();
        if (s.contains("auc_to")) c.evaluation.auc_to = s.at("auc_to").get<double>();
        if (s.contains("peaks")) {
            for (const auto& p : s.at("peaks")) {
                reject_unknown(p, {"channel", "time"}, "evaluation.peaks[]");
                c.evaluation.peaks.push_back(
                    {p.at("channel").get<std::string>(), p.at("time").get<double>()});
            }
        }
    }
    if (j.contains("delay_sweep")) {
        c.delay_sweep = j.at("delay_sweep").get<std::vector<double>>();
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("config: malformed JSON in '" + path + "': " + std::string(e.what()));
    }
    return from_json(j);
}

json PipelineConfig::to_json() const {
    json j;
    j["plant"] = plant;
    json exps = json::array();
    for (const auto& e : experiments) exps.push_back(disturbance_to_json(e));
    j["experiments"] = exps;
    j["sampling"] = {{"raw_sample_time", sampling.raw_sample_time},
                     {"decimation", sampling.decimation},
                     {"window_length", sampling.window_length},
                     {"noise_std", sampling.noise_std},
                     {"lead", sampling.lead}};
    j["identification"] = {{"order_candidates", identification.order_candidates},
                           {"max_iterations", identification.max_iterations},
                           {"objective_tolerance", identification.objective_tolerance},
                           {"stability_margin", identification.stability_margin}};
    j["mode_band"] = {mode_band.lo_hz, mode_band.hi_hz};
    json ctrl = {{"enabled", controller.enabled},
                 {"rho", controller.rho},
                 {"process_noise", controller.process_noise},
                 {"measurement_noise", controller.measurement_noise}};
    ctrl["saturation"] = controller.saturation ? json(*controller.saturation) : json(nullptr);
    if (controller.delay) ctrl["delay"] = *controller.delay;
    ctrl["riccati_tolerance"] = controller.riccati_tolerance;
    ctrl["riccati_max_iterations"] = controller.riccati_max_iterations;
    j["controller"] = ctrl;
    json eval;
    if (evaluation.disturbance) eval["disturbance"] = disturbance_to_json(*evaluation.disturbance);
    eval["horizon"] = evaluation.horizon;
    eval["measurement_noise"] = evaluation.measurement_noise;
    if (evaluation.auc_from) eval["auc_from"] = *evaluation.auc_from;
    if (evaluation.auc_to) eval["auc_to"] = *evaluation.auc_to;
    json peaks = json::array();
    for (const auto& p : evaluation.peaks) {
        peaks.push_back({{"channel", p.channel}, {"time", p.time}});
    }
    eval["peaks"] = peaks;
    j["evaluation"] = eval;
    j["delay_sweep"] = delay_sweep;
    j["output_dir"] = output_dir;
    j["seed"] = seed;
    return j;
}

std::string config_hash(const PipelineConfig& config) {
    const std::string dump = config.to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace wadamp::pipeline
