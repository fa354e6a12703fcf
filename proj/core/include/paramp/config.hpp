#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paramp/errors.hpp"
#include "paramp/model.hpp"

namespace paramp {

// Configuration file problem: carries the JSON path (or line info from the
// parser) of the offending entry.
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class TaskKind {
    Scatter,
    GainSweep,
    PoutSweep,
    ThresholdSweep,
    Wigner,
    Mc,
    CircuitParams,
};

const char* task_name(TaskKind task);
TaskKind task_from_name(const std::string& name);

struct TaskConfig {
    TaskKind kind = TaskKind::Scatter;
    // scatter
    double omega_min_kappa = -5.0;
    double omega_max_kappa = 5.0;
    int n_points = 201;
    // gain-sweep / pout-sweep
    std::vector<double> gains_db = {5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
    double p_in_min_dbm = -160.0;
    double p_in_max_dbm = -90.0;
    int points_per_decade = 20;  // one decade of power = 10 dBm
    double compression_drop_db = 1.0;
    // threshold-sweep
    double signal_min_dbm = -130.0;
    double signal_max_dbm = -80.0;
    int signal_points = 11;
    double cap_db = 40.0;
    // wigner / mc
    int grid_points = 101;
    std::string mode = "signal";
    int bins = 64;
    long n_trajectories = 10000;
    double burn_in_kappa = 30.0;   // burn-in in units of 1/kappa_a
    double duration_kappa = 10.0;  // sampling window in units of 1/kappa_a
    int n_samples = 1;
    // circuit-params
    std::string circuit_kind;            // duffing | squid | double-pump | jrm
    std::vector<std::pair<std::string, double>> circuit_values;
};

struct NumericsConfig {
    std::uint64_t seed = 1;
    int threads = 0;
    double dt_factor = 0.005;
    double fp_tolerance = 1e-12;
    int fp_max_iterations = 100000;
    double relaxation = 0.3;
    int multistart_points = 32;
    double threshold_tolerance = 1e-4;
};

struct ExperimentConfig {
    AmplifierModel model;
    DriveConditions drive;
    TaskConfig task;
    NumericsConfig numerics;
    bool has_model = false;
    bool has_drive = false;
};

// Parses and validates a configuration document. Frequencies are given in Hz
// and converted to angular units on ingestion; unknown keys are rejected with
// their JSON path. The model/drive sections are optional for circuit-params.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Fully merged configuration (user values plus all defaults), serialized
// deterministically. parse_config(print_config(c)) round-trips.
std::string print_config(const ExperimentConfig& config);

// FNV-1a hash of the canonical serialization, for run manifests.
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace paramp
