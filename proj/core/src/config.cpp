#include "paramp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace paramp {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ConfigError("config error at " + path + ": " + message);
}

void reject_unknown_keys(const json& section, const std::string& path,
                         const std::set<std::string>& known) {
    for (const auto& item : section.items()) {
        if (!known.count(item.key())) {
            fail(path + "/" + item.key(), "unknown key");
        }
    }
}

double require_number(const json& section, const std::string& path, const std::string& key) {
    if (!section.contains(key)) fail(path + "/" + key, "missing required value");
    if (!section[key].is_number()) fail(path + "/" + key, "expected a number");
    return section[key].get<double>();
}

double number_or(const json& section, const std::string& path, const std::string& key,
                 double fallback) {
    if (!section.contains(key)) return fallback;
    if (!section[key].is_number()) fail(path + "/" + key, "expected a number");
    return section[key].get<double>();
}

long integer_or(const json& section, const std::string& path, const std::string& key,
                long fallback) {
    if (!section.contains(key)) return fallback;
    if (!section[key].is_number_integer()) fail(path + "/" + key, "expected an integer");
    return section[key].get<long>();
}

std::string string_or(const json& section, const std::string& path, const std::string& key,
                      const std::string& fallback) {
    if (!section.contains(key)) return fallback;
    if (!section[key].is_string()) fail(path + "/" + key, "expected a string");
    return section[key].get<std::string>();
}

AmplifierModel parse_model(const json& section) {
    reject_unknown_keys(section, "/model",
                        {"topology", "omega_a_hz", "kappa_a_hz", "omega_b_hz", "kappa_b_hz",
                         "omega_c_hz", "kappa_c_hz", "g_hz"});
    AmplifierModel model;
    const std::string topology = string_or(section, "/model", "topology", "");
    if (topology == "ndpa") {
        model.topology = Topology::NonDegenerate;
    } else if (topology == "dpa") {
        model.topology = Topology::Degenerate;
    } else {
        fail("/model/topology", "expected \"ndpa\" or \"dpa\"");
    }
    model.signal_mode.omega = hz_to_angular(require_number(section, "/model", "omega_a_hz"));
    model.signal_mode.kappa = hz_to_angular(require_number(section, "/model", "kappa_a_hz"));
    if (model.topology == Topology::NonDegenerate) {
        ModeParams idler;
        idler.omega = hz_to_angular(require_number(section, "/model", "omega_b_hz"));
        idler.kappa = hz_to_angular(require_number(section, "/model", "kappa_b_hz"));
        model.idler_mode = idler;
    } else if (section.contains("omega_b_hz") || section.contains("kappa_b_hz")) {
        fail("/model/omega_b_hz", "degenerate topology has no idler mode");
    }
    model.pump_mode.omega = hz_to_angular(require_number(section, "/model", "omega_c_hz"));
    model.pump_mode.kappa = hz_to_angular(require_number(section, "/model", "kappa_c_hz"));
    model.coupling = hz_to_angular(require_number(section, "/model", "g_hz"));
    try {
        model.validate();
    } catch (const InvalidParameter& error) {
        fail("/model", error.what());
    }
    return model;
}

DriveConditions parse_drive(const json& section, const AmplifierModel& model) {
    reject_unknown_keys(section, "/drive",
                        {"pump_power_dbm", "pump_flux", "rho0", "pump_gain_db",
                         "pump_phase_rad", "signal_power_dbm", "signal_flux",
                         "signal_phase_rad"});
    DriveConditions drive;
    drive.pump_frequency = model.degenerate()
        ? 2.0 * model.signal_mode.omega
        : model.signal_mode.omega + model.idler_mode->omega;
    drive.signal_frequency = model.signal_mode.omega;
    drive.pump_phase = number_or(section, "/drive", "pump_phase_rad", 0.0);
    drive.signal_phase = number_or(section, "/drive", "signal_phase_rad", 0.0);

    const int pump_keys = section.contains("pump_power_dbm") + section.contains("pump_flux") +
                          section.contains("rho0") + section.contains("pump_gain_db");
    if (pump_keys > 1) {
        fail("/drive", "give exactly one of pump_power_dbm, pump_flux, rho0, pump_gain_db");
    }
    if (section.contains("pump_power_dbm")) {
        drive.pump_flux_amplitude = std::sqrt(dbm_to_flux(
            require_number(section, "/drive", "pump_power_dbm"), model.pump_mode.omega));
    } else if (section.contains("pump_flux")) {
        const double flux = require_number(section, "/drive", "pump_flux");
        if (flux < 0.0) fail("/drive/pump_flux", "must be >= 0");
        drive.pump_flux_amplitude = std::sqrt(flux);
    } else if (section.contains("rho0")) {
        drive.pump_flux_amplitude =
            pump_amplitude_for_rho0(model, require_number(section, "/drive", "rho0"));
    } else if (section.contains("pump_gain_db")) {
        const double gain_db = require_number(section, "/drive", "pump_gain_db");
        drive.pump_flux_amplitude =
            pump_amplitude_for_rho0(model, rho_for_gain(std::pow(10.0, gain_db / 10.0)));
    }

    if (section.contains("signal_power_dbm") && section.contains("signal_flux")) {
        fail("/drive", "give only one of signal_power_dbm and signal_flux");
    }
    if (section.contains("signal_power_dbm")) {
        drive.signal_flux = dbm_to_flux(
            require_number(section, "/drive", "signal_power_dbm"), model.signal_mode.omega);
    } else if (section.contains("signal_flux")) {
        drive.signal_flux = require_number(section, "/drive", "signal_flux");
    }
    try {
        drive.validate();
    } catch (const InvalidParameter& error) {
        fail("/drive", error.what());
    }
    return drive;
}

TaskConfig parse_task(const json& section) {
    reject_unknown_keys(
        section, "/task",
        {"name", "omega_min_kappa", "omega_max_kappa", "n_points", "gains_db", "p_in_min_dbm",
         "p_in_max_dbm", "points_per_decade", "compression_drop_db", "signal_min_dbm",
         "signal_max_dbm", "signal_points", "cap_db", "grid_points", "mode", "bins",
         "n_trajectories", "burn_in_kappa", "duration_kappa", "n_samples", "circuit"});
    TaskConfig task;
    if (!section.contains("name")) fail("/task/name", "missing required value");
    task.kind = task_from_name(string_or(section, "/task", "name", ""));
    task.omega_min_kappa = number_or(section, "/task", "omega_min_kappa", task.omega_min_kappa);
    task.omega_max_kappa = number_or(section, "/task", "omega_max_kappa", task.omega_max_kappa);
    task.n_points = static_cast<int>(integer_or(section, "/task", "n_points", task.n_points));
    if (section.contains("gains_db")) {
        if (!section["gains_db"].is_array()) fail("/task/gains_db", "expected an array");
        task.gains_db.clear();
        for (const auto& value : section["gains_db"]) {
            if (!value.is_number()) fail("/task/gains_db", "expected numbers");
            task.gains_db.push_back(value.get<double>());
        }
    }
    task.p_in_min_dbm = number_or(section, "/task", "p_in_min_dbm", task.p_in_min_dbm);
    task.p_in_max_dbm = number_or(section, "/task", "p_in_max_dbm", task.p_in_max_dbm);
    task.points_per_decade =
        static_cast<int>(integer_or(section, "/task", "points_per_decade", task.points_per_decade));
    task.compression_drop_db =
        number_or(section, "/task", "compression_drop_db", task.compression_drop_db);
    task.signal_min_dbm = number_or(section, "/task", "signal_min_dbm", task.signal_min_dbm);
    task.signal_max_dbm = number_or(section, "/task", "signal_max_dbm", task.signal_max_dbm);
    task.signal_points =
        static_cast<int>(integer_or(section, "/task", "signal_points", task.signal_points));
    task.cap_db = number_or(section, "/task", "cap_db", task.cap_db);
    task.grid_points = static_cast<int>(integer_or(section, "/task", "grid_points", task.grid_points));
    task.mode = string_or(section, "/task", "mode", task.mode);
    if (task.mode != "signal" && task.mode != "idler" && task.mode != "pump") {
        fail("/task/mode", "expected signal, idler or pump");
    }
    task.bins = static_cast<int>(integer_or(section, "/task", "bins", task.bins));
    task.n_trajectories = integer_or(section, "/task", "n_trajectories", task.n_trajectories);
    task.burn_in_kappa = number_or(section, "/task", "burn_in_kappa", task.burn_in_kappa);
    task.duration_kappa = number_or(section, "/task", "duration_kappa", task.duration_kappa);
    task.n_samples = static_cast<int>(integer_or(section, "/task", "n_samples", task.n_samples));
    if (section.contains("circuit")) {
        const json& circuit = section["circuit"];
        if (!circuit.is_object()) fail("/task/circuit", "expected an object");
        for (const auto& item : circuit.items()) {
            if (item.key() == "kind") {
                if (!item.value().is_string()) fail("/task/circuit/kind", "expected a string");
                task.circuit_kind = item.value().get<std::string>();
            } else {
                if (!item.value().is_number()) {
                    fail("/task/circuit/" + item.key(), "expected a number");
                }
                task.circuit_values.emplace_back(item.key(), item.value().get<double>());
            }
        }
    }
    return task;
}

NumericsConfig parse_numerics(const json& section) {
    reject_unknown_keys(section, "/numerics",
                        {"seed", "threads", "dt_factor", "fp_tolerance", "fp_max_iterations",
                         "relaxation", "multistart_points", "threshold_tolerance"});
    NumericsConfig numerics;
    numerics.seed = static_cast<std::uint64_t>(
        integer_or(section, "/numerics", "seed", static_cast<long>(numerics.seed)));
    numerics.threads = static_cast<int>(integer_or(section, "/numerics", "threads", 0));
    numerics.dt_factor = number_or(section, "/numerics", "dt_factor", numerics.dt_factor);
    numerics.fp_tolerance = number_or(section, "/numerics", "fp_tolerance", numerics.fp_tolerance);
    numerics.fp_max_iterations = static_cast<int>(
        integer_or(section, "/numerics", "fp_max_iterations", numerics.fp_max_iterations));
    numerics.relaxation = number_or(section, "/numerics", "relaxation", numerics.relaxation);
    numerics.multistart_points = static_cast<int>(
        integer_or(section, "/numerics", "multistart_points", numerics.multistart_points));
    numerics.threshold_tolerance =
        number_or(section, "/numerics", "threshold_tolerance", numerics.threshold_tolerance);
    return numerics;
}

}  // namespace

const char* task_name(TaskKind task) {
    switch (task) {
        case TaskKind::Scatter: return "scatter";
        case TaskKind::GainSweep: return "gain-sweep";
        case TaskKind::PoutSweep: return "pout-sweep";
        case TaskKind::ThresholdSweep: return "threshold-sweep";
        case TaskKind::Wigner: return "wigner";
        case TaskKind::Mc: return "mc";
        case TaskKind::CircuitParams: return "circuit-params";
    }
    return "scatter";
}

TaskKind task_from_name(const std::string& name) {
    for (TaskKind kind :
         {TaskKind::Scatter, TaskKind::GainSweep, TaskKind::PoutSweep, TaskKind::ThresholdSweep,
          TaskKind::Wigner, TaskKind::Mc, TaskKind::CircuitParams}) {
        if (name == task_name(kind)) return kind;
    }
    fail("/task/name", "unknown task \"" + name + "\"");
}

ExperimentConfig parse_config(const std::string& json_text) {
    json document;
    try {
        document = json::parse(json_text);
    } catch (const json::parse_error& error) {
        throw ConfigError(std::string("config parse error: ") + error.what());
    }
    if (!document.is_object()) {
        throw ConfigError("config error at /: expected an object");
    }
    reject_unknown_keys(document, "", {"model", "drive", "task", "numerics"});
    if (!document.contains("task")) {
        fail("/task", "missing required section");
    }

    ExperimentConfig config;
    config.task = parse_task(document["task"]);
    if (document.contains("model")) {
        config.model = parse_model(document["model"]);
        config.has_model = true;
    }
    if (document.contains("drive")) {
        if (!config.has_model) fail("/drive", "a drive section needs a model section");
        config.drive = parse_drive(document["drive"], config.model);
        config.has_drive = true;
    }
    if (document.contains("numerics")) {
        config.numerics = parse_numerics(document["numerics"]);
    }
    if (config.task.kind != TaskKind::CircuitParams && !config.has_model) {
        fail("/model", "missing required section for this task");
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string print_config(const ExperimentConfig& config) {
    json document;
    if (config.has_model) {
        json model;
        model["topology"] = config.model.degenerate() ? "dpa" : "ndpa";
        model["omega_a_hz"] = angular_to_hz(config.model.signal_mode.omega);
        model["kappa_a_hz"] = angular_to_hz(config.model.signal_mode.kappa);
        if (config.model.idler_mode) {
            model["omega_b_hz"] = angular_to_hz(config.model.idler_mode->omega);
            model["kappa_b_hz"] = angular_to_hz(config.model.idler_mode->kappa);
        }
        model["omega_c_hz"] = angular_to_hz(config.model.pump_mode.omega);
        model["kappa_c_hz"] = angular_to_hz(config.model.pump_mode.kappa);
        model["g_hz"] = angular_to_hz(config.model.coupling);
        document["model"] = model;

        json drive;
        drive["pump_flux"] = config.drive.pump_flux();
        drive["pump_phase_rad"] = config.drive.pump_phase;
        drive["signal_flux"] = config.drive.signal_flux;
        drive["signal_phase_rad"] = config.drive.signal_phase;
        document["drive"] = drive;
    }

    json task;
    task["name"] = task_name(config.task.kind);
    task["omega_min_kappa"] = config.task.omega_min_kappa;
    task["omega_max_kappa"] = config.task.omega_max_kappa;
    task["n_points"] = config.task.n_points;
    task["gains_db"] = config.task.gains_db;
    task["p_in_min_dbm"] = config.task.p_in_min_dbm;
    task["p_in_max_dbm"] = config.task.p_in_max_dbm;
    task["points_per_decade"] = config.task.points_per_decade;
    task["compression_drop_db"] = config.task.compression_drop_db;
    task["signal_min_dbm"] = config.task.signal_min_dbm;
    task["signal_max_dbm"] = config.task.signal_max_dbm;
    task["signal_points"] = config.task.signal_points;
    task["cap_db"] = config.task.cap_db;
    task["grid_points"] = config.task.grid_points;
    task["mode"] = config.task.mode;
    task["bins"] = config.task.bins;
    task["n_trajectories"] = config.task.n_trajectories;
    task["burn_in_kappa"] = config.task.burn_in_kappa;
    task["duration_kappa"] = config.task.duration_kappa;
    task["n_samples"] = config.task.n_samples;
    if (!config.task.circuit_kind.empty()) {
        json circuit;
        circuit["kind"] = config.task.circuit_kind;
        for (const auto& [key, value] : config.task.circuit_values) circuit[key] = value;
        task["circuit"] = circuit;
    }
    document["task"] = task;

    json numerics;
    numerics["seed"] = config.numerics.seed;
    numerics["threads"] = config.numerics.threads;
    numerics["dt_factor"] = config.numerics.dt_factor;
    numerics["fp_tolerance"] = config.numerics.fp_tolerance;
    numerics["fp_max_iterations"] = config.numerics.fp_max_iterations;
    numerics["relaxation"] = config.numerics.relaxation;
    numerics["multistart_points"] = config.numerics.multistart_points;
    numerics["threshold_tolerance"] = config.numerics.threshold_tolerance;
    document["numerics"] = numerics;

    return document.dump(2) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    const std::string canonical = print_config(config);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

}  // namespace paramp
