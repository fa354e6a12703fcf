#include "paramp/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "paramp/circuits.hpp"
#include "paramp/depletion.hpp"
#include "paramp/fluctuations.hpp"
#include "paramp/scattering.hpp"
#include "paramp/semiclassical.hpp"
#include "paramp/wigner_mc.hpp"

#ifndef PARAMP_VERSION
#define PARAMP_VERSION "unversioned"
#endif

namespace paramp {

namespace {

std::string format_number(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) {
            throw OutputError("cannot open output file: " + path);
        }
        for (size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ",";
            out_ << header[i];
        }
        out_ << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ",";
            out_ << cells[i];
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

RhoSolverOptions solver_options(const ExperimentConfig& config) {
    RhoSolverOptions options;
    options.tolerance = config.numerics.fp_tolerance;
    options.max_iterations = config.numerics.fp_max_iterations;
    options.relaxation = config.numerics.relaxation;
    return options;
}

ThresholdOptions threshold_options(const ExperimentConfig& config) {
    ThresholdOptions options;
    options.relative_tolerance = config.numerics.threshold_tolerance;
    options.cap_db_above_zero_signal = config.task.cap_db;
    options.steady_options.multistart_points = config.numerics.multistart_points;
    return options;
}

DriveConditions drive_for_gain(const ExperimentConfig& config, double gain_db) {
    DriveConditions drive = config.drive;
    drive.pump_flux_amplitude =
        pump_amplitude_for_rho0(config.model, rho_for_gain(std::pow(10.0, gain_db / 10.0)));
    return drive;
}

std::vector<double> input_power_grid_dbm(const TaskConfig& task) {
    std::vector<double> grid;
    const double step = 10.0 / task.points_per_decade;
    for (double dbm = task.p_in_min_dbm; dbm <= task.p_in_max_dbm + 1e-9; dbm += step) {
        grid.push_back(dbm);
    }
    return grid;
}

int mode_index(const ExperimentConfig& config) {
    if (config.task.mode == "signal") return 0;
    if (config.task.mode == "idler") {
        if (config.model.degenerate()) {
            throw ConfigError("config error at /task/mode: degenerate model has no idler mode");
        }
        return 1;
    }
    return config.model.degenerate() ? 1 : 2;
}

void write_manifest(const ExperimentConfig& config, const std::string& out_dir,
                    RunResult& result) {
    const std::string path = join_path(out_dir, "run_manifest.txt");
    std::ofstream out(path);
    if (!out) throw OutputError("cannot open output file: " + path);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_hash(config)));
    out << "task " << task_name(config.task.kind) << "\n";
    out << "config_hash " << hash << "\n";
    out << "seed " << config.numerics.seed << "\n";
    out << "version " << PARAMP_VERSION << "\n";
    result.files.push_back(path);
}

void run_scatter(const ExperimentConfig& config, const std::string& out_dir, RunResult& result) {
    const AmplifierModel& model = config.model;
    const EffectiveDrive drive = effective_drive(model, config.drive);
    const bool degenerate = model.degenerate();

    std::vector<std::string> header = {"omega_s_hz", "detuning_kappa", "gain_db",
                                       "r_ss_re",    "r_ss_im",        "s_si_abs",
                                       "det_abs"};
    if (degenerate) {
        header.push_back("g_parallel_db");
        header.push_back("g_perpendicular_db");
    }
    const std::string path = join_path(out_dir, "scatter.csv");
    CsvWriter csv(path, header);

    const double kappa = model.signal_mode.kappa;
    for (int i = 0; i < config.task.n_points; ++i) {
        const double frac = config.task.n_points == 1
            ? 0.0
            : static_cast<double>(i) / (config.task.n_points - 1);
        const double detuning = config.task.omega_min_kappa +
                                frac * (config.task.omega_max_kappa - config.task.omega_min_kappa);
        const double omega_s = model.signal_mode.omega + detuning * kappa;
        const ScatteringBlock block = degenerate ? dpa_scattering(model, drive, omega_s)
                                                 : ndpa_scattering(model, drive, omega_s);
        std::vector<std::string> row = {
            format_number(angular_to_hz(omega_s)),
            format_number(detuning),
            format_number(10.0 * std::log10(std::norm(block.r_ss()))),
            format_number(block.r_ss().real()),
            format_number(block.r_ss().imag()),
            format_number(std::abs(block.s_si())),
            format_number(std::abs(block.entries.determinant())),
        };
        if (degenerate) {
            const QuadratureGains gains = quadrature_gains(block);
            row.push_back(format_number(10.0 * std::log10(gains.g_parallel)));
            row.push_back(format_number(10.0 * std::log10(gains.g_perpendicular)));
        }
        csv.row(row);
    }
    result.files.push_back(path);
}

void run_gain_or_pout_sweep(const ExperimentConfig& config, const std::string& out_dir,
                            RunResult& result) {
    const AmplifierModel& model = config.model;
    const double carrier = model.signal_mode.omega;
    const std::vector<double> grid_dbm = input_power_grid_dbm(config.task);
    const RhoSolverOptions options = solver_options(config);

    std::vector<CompressionPoint> compression_points;
    std::vector<double> compression_gains;

    for (double gain_db : config.task.gains_db) {
        const DriveConditions drive_template = drive_for_gain(config, gain_db);
        char name[64];
        std::snprintf(name, sizeof(name), "gain_sweep_%gdb.csv", gain_db);
        const std::string path = join_path(out_dir, name);
        CsvWriter csv(path, {"p_in_dbm", "p_in_flux_per_s", "rho", "gain_db",
                             "p_out_flux_per_s", "p_out_dbm", "status"});
        RhoSolverOptions point_options = options;
        for (double dbm : grid_dbm) {
            DriveConditions drive = drive_template;
            drive.signal_flux = dbm_to_flux(dbm, carrier);
            try {
                const DepletedOperatingPoint point = solve_rho(model, drive, point_options);
                point_options.initial_guess = point.rho;  // continuation along the sweep
                csv.row({format_number(dbm), format_number(drive.signal_flux),
                         format_number(point.rho),
                         format_number(10.0 * std::log10(point.gain)),
                         format_number(point.p_out_total),
                         format_number(flux_to_dbm(point.p_out_total, carrier)), "ok"});
            } catch (const Error&) {
                csv.row({format_number(dbm), format_number(drive.signal_flux), "", "", "", "",
                         "failed"});
            }
        }
        result.files.push_back(path);

        // Compression search window extends beyond the plotted range so the
        // low-gain points are found as well.
        try {
            const CompressionPoint point = compression_point(
                model, drive_template, config.task.compression_drop_db,
                dbm_to_flux(config.task.p_in_min_dbm - 40.0, carrier),
                dbm_to_flux(config.task.p_in_max_dbm + 60.0, carrier), options);
            compression_points.push_back(point);
            compression_gains.push_back(gain_db);
        } catch (const Error&) {
            // flagged by its absence from compression_points.csv
        }
    }

    {
        const std::string path = join_path(out_dir, "compression_points.csv");
        CsvWriter csv(path, {"undepleted_gain_db", "reference_gain_db", "p_1db_dbm",
                             "gain_at_point_db"});
        for (size_t i = 0; i < compression_points.size(); ++i) {
            const CompressionPoint& point = compression_points[i];
            csv.row({format_number(compression_gains[i]),
                     format_number(10.0 * std::log10(point.reference_gain)),
                     format_number(flux_to_dbm(point.p_in_1db, carrier)),
                     format_number(10.0 * std::log10(point.gain_at_point))});
        }
        result.files.push_back(path);
    }
    if (compression_points.size() >= 2) {
        const std::string path = join_path(out_dir, "compression_fit.csv");
        CsvWriter csv(path, {"slope_db_per_dbm", "n_points"});
        csv.row({format_number(compression_line_slope(model, compression_points)),
                 format_number(static_cast<double>(compression_points.size()))});
        result.files.push_back(path);
    }

    if (config.task.kind == TaskKind::PoutSweep) {
        {
            const std::string path = join_path(out_dir, "pump_off.csv");
            CsvWriter csv(path, {"p_in_dbm", "p_out_dbm"});
            for (double dbm : grid_dbm) csv.row({format_number(dbm), format_number(dbm)});
            result.files.push_back(path);
        }
        {
            // Maximum output before spontaneous oscillation, on a decimated
            // grid (each point runs a threshold search).
            const std::string path = join_path(out_dir, "max_output.csv");
            CsvWriter csv(path, {"p_in_dbm", "status", "pump_threshold_flux_per_s",
                                 "p_out_max_flux_per_s", "p_out_max_dbm"});
            const ThresholdOptions thresholds = threshold_options(config);
            for (double dbm = config.task.p_in_min_dbm; dbm <= config.task.p_in_max_dbm + 1e-9;
                 dbm += 5.0) {
                const double flux = dbm_to_flux(dbm, carrier);
                try {
                    const ThresholdResult threshold =
                        oscillation_threshold(model, flux, thresholds);
                    if (threshold.status != ThresholdStatus::Found) {
                        csv.row({format_number(dbm), "no-threshold", "", "", ""});
                        continue;
                    }
                    const double p_out = max_output_before_oscillation(model, flux, thresholds);
                    csv.row({format_number(dbm), "ok",
                             format_number(threshold.pump_flux_threshold),
                             format_number(p_out),
                             format_number(flux_to_dbm(p_out, carrier))});
                } catch (const Error&) {
                    csv.row({format_number(dbm), "failed", "", "", ""});
                }
            }
            result.files.push_back(path);
        }
    }
}

void run_threshold_sweep(const ExperimentConfig& config, const std::string& out_dir,
                         RunResult& result) {
    const AmplifierModel& model = config.model;
    const double carrier = model.signal_mode.omega;
    const ThresholdOptions options = threshold_options(config);
    const double zero_thr = zero_signal_threshold_flux(model);

    const std::string path = join_path(out_dir, "threshold_sweep.csv");
    CsvWriter csv(path, {"signal_dbm", "signal_flux_per_s", "status",
                         "pump_threshold_flux_per_s", "pump_threshold_dbm", "shift_db"});
    for (int i = 0; i < config.task.signal_points; ++i) {
        const double frac = config.task.signal_points == 1
            ? 0.0
            : static_cast<double>(i) / (config.task.signal_points - 1);
        const double dbm = config.task.signal_min_dbm +
                           frac * (config.task.signal_max_dbm - config.task.signal_min_dbm);
        const double flux = dbm_to_flux(dbm, carrier);
        try {
            const ThresholdResult threshold = oscillation_threshold(model, flux, options);
            if (threshold.status == ThresholdStatus::Found) {
                csv.row({format_number(dbm), format_number(flux), "ok",
                         format_number(threshold.pump_flux_threshold),
                         format_number(flux_to_dbm(threshold.pump_flux_threshold,
                                                   model.pump_mode.omega)),
                         format_number(10.0 * std::log10(threshold.pump_flux_threshold /
                                                         zero_thr))});
            } else if (threshold.status == ThresholdStatus::NoThreshold) {
                csv.row({format_number(dbm), format_number(flux), "no-threshold", "", "", ""});
            } else {
                csv.row({format_number(dbm), format_number(flux), "inconclusive", "", "", ""});
            }
        } catch (const Error&) {
            csv.row({format_number(dbm), format_number(flux), "failed", "", "", ""});
        }
    }
    result.files.push_back(path);
}

const SteadyState& operating_state(const std::vector<SteadyState>& states) {
    const SteadyState* best = nullptr;
    for (const SteadyState& state : states) {
        if (state.stability == Stability::Unstable) continue;
        if (!best || std::abs(state.amplitudes[0]) > std::abs(best->amplitudes[0])) {
            best = &state;
        }
    }
    if (!best) {
        throw NonConvergence("no stable operating state at this drive", {});
    }
    return *best;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix,
                      const Eigen::MatrixXd* errors, RunResult& result) {
    std::vector<std::string> header = {"row", "col", "value"};
    if (errors) header.push_back("std_error");
    CsvWriter csv(path, header);
    for (int i = 0; i < matrix.rows(); ++i) {
        for (int j = 0; j < matrix.cols(); ++j) {
            std::vector<std::string> row = {format_number(i), format_number(j),
                                            format_number(matrix(i, j))};
            if (errors) row.push_back(format_number((*errors)(i, j)));
            csv.row(row);
        }
    }
    result.files.push_back(path);
}

void run_wigner(const ExperimentConfig& config, const std::string& out_dir, RunResult& result) {
    const AmplifierModel& model = config.model;
    const std::vector<SteadyState> states = steady_states(model, config.drive);
    const SteadyState& state = operating_state(states);
    FluctuationState fluc = assemble_fokker_planck(model, state);
    steady_covariance(fluc);
    const Eigen::MatrixXd cov = fluc.lab_covariance();
    const Eigen::VectorXd means = fluc.lab_means(model, state);

    const int mode = mode_index(config);
    const int coord_x = mode;
    const int coord_y = mode + fluc.n_modes;
    const GridSpec grid =
        auto_grid(cov, means, coord_x, coord_y, config.task.grid_points, config.task.grid_points);
    const WignerField field = gaussian_wigner_grid(cov, means, coord_x, coord_y, grid);

    const std::string grid_path = join_path(out_dir, "wigner_grid.txt");
    std::ofstream out(grid_path);
    if (!out) throw OutputError("cannot open output file: " + grid_path);
    out.precision(12);
    out << "# mode " << config.task.mode << " quadratures (re, im), raw units\n";
    out << "# sqrt_np_thr " << format_number(amplitude_scale(model)) << "\n";
    out << "# x_axis " << format_number(grid.x_min) << " " << format_number(grid.x_max) << " "
        << grid.nx << "\n";
    out << "# y_axis " << format_number(grid.y_min) << " " << format_number(grid.y_max) << " "
        << grid.ny << "\n";
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            if (ix) out << " ";
            out << format_number(field.values[static_cast<size_t>(iy) * grid.nx + ix]);
        }
        out << "\n";
    }
    result.files.push_back(grid_path);

    write_matrix_csv(join_path(out_dir, "covariance.csv"), cov, nullptr, result);
    {
        const std::string path = join_path(out_dir, "means.csv");
        CsvWriter csv(path, {"coordinate", "mean_quadrature"});
        for (int i = 0; i < means.size(); ++i) {
            csv.row({format_number(i), format_number(means(i))});
        }
        result.files.push_back(path);
    }
}

void run_mc(const ExperimentConfig& config, const std::string& out_dir, RunResult& result) {
    const AmplifierModel& model = config.model;
    EnsembleConfig ensemble_config;
    ensemble_config.n_trajectories = static_cast<int>(config.task.n_trajectories);
    ensemble_config.burn_in = config.task.burn_in_kappa / model.signal_mode.kappa;
    ensemble_config.t_final =
        ensemble_config.burn_in + config.task.duration_kappa / model.signal_mode.kappa;
    ensemble_config.n_samples = config.task.n_samples;
    ensemble_config.master_seed = config.numerics.seed;
    ensemble_config.n_threads = config.numerics.threads;
    ensemble_config.dt_factor = config.numerics.dt_factor;

    const TrajectoryEnsemble ensemble = simulate(model, config.drive, ensemble_config);
    const SampleCovariance stats = sample_covariance(ensemble);

    write_matrix_csv(join_path(out_dir, "mc_covariance.csv"), stats.covariance,
                     &stats.covariance_se, result);
    {
        const std::string path = join_path(out_dir, "mc_moments.csv");
        CsvWriter csv(path, {"coordinate", "mean_quadrature", "std_error"});
        for (int i = 0; i < stats.mean.size(); ++i) {
            csv.row({format_number(i), format_number(stats.mean(i)),
                     format_number(stats.mean_se(i))});
        }
        result.files.push_back(path);
    }
    {
        const FluxEstimate flux = output_flux_estimate(ensemble, model, config.drive);
        const std::string path = join_path(out_dir, "output_flux.csv");
        CsvWriter csv(path, {"p_in_flux_per_s", "p_out_flux_per_s", "std_error_per_s"});
        csv.row({format_number(config.drive.signal_flux), format_number(flux.flux),
                 format_number(flux.std_error)});
        result.files.push_back(path);
    }
    {
        const Histogram2D hist =
            histogram2d(ensemble, mode_index(config), config.task.bins, config.task.bins);
        const std::string path = join_path(out_dir, "mc_histogram.txt");
        std::ofstream out(path);
        if (!out) throw OutputError("cannot open output file: " + path);
        out << "# mode " << config.task.mode << " quadratures (re, im), raw units\n";
        out << "# sqrt_np_thr " << format_number(amplitude_scale(model)) << "\n";
        out << histogram_to_text(hist);
        result.files.push_back(path);
    }
}

double circuit_value(const TaskConfig& task, const std::string& key, double fallback,
                     bool required = false) {
    for (const auto& [name, value] : task.circuit_values) {
        if (name == key) return value;
    }
    if (required) {
        throw ConfigError("config error at /task/circuit/" + key + ": missing required value");
    }
    return fallback;
}

void run_circuit_params(const ExperimentConfig& config, const std::string& out_dir,
                        RunResult& result) {
    const TaskConfig& task = config.task;
    const std::string path = join_path(out_dir, "circuit_params.csv");
    CsvWriter csv(path, {"name", "value", "unit"});
    auto emit = [&](const std::string& name, double value, const std::string& unit) {
        csv.row({name, format_number(value), unit});
    };

    if (task.circuit_kind == "duffing") {
        JunctionParams junction;
        junction.josephson_energy =
            circuit_value(task, "e_j_hz", 0.0, true) * two_pi * hbar;  // E_J / h in Hz
        junction.total_capacitance = circuit_value(task, "c_sigma_f", 0.0, true);
        DuffingDrive drive;
        drive.kappa_a = hz_to_angular(circuit_value(task, "kappa_a_hz", 0.0, true));
        drive.pump_amplitude = circuit_value(task, "pump_amplitude_sqrt_flux", 0.0);
        drive.pump_phase = circuit_value(task, "pump_phase_rad", 0.0);
        drive.Omega = hz_to_angular(circuit_value(task, "omega_drive_hz", 0.0));
        const DuffingEffective eff = duffing_effective(junction, drive);
        emit("kerr_hz", angular_to_hz(eff.kerr), "hz");
        emit("omega_bare_hz", angular_to_hz(eff.omega_bare), "hz");
        emit("bistable", eff.bistable ? 1.0 : 0.0, "flag");
        for (size_t i = 0; i < eff.branch_photon_numbers.size(); ++i) {
            emit("branch_" + std::to_string(i) + "_photons", eff.branch_photon_numbers[i],
                 "photons");
        }
        if (!eff.bistable) {
            emit("omega_a_eff_hz", angular_to_hz(eff.omega_a_eff), "hz");
            emit("g_aa_hz", angular_to_hz(eff.g_aa), "hz");
            emit("omega_aa_hz", angular_to_hz(eff.Omega_aa), "hz");
            emit("theta_rad", eff.theta, "rad");
        }
    } else if (task.circuit_kind == "squid") {
        SquidParams squid;
        squid.junction_inductance = circuit_value(task, "l_j_h", 0.0, true);
        squid.total_capacitance = circuit_value(task, "c_sigma_f", 0.0, true);
        squid.flux_bias = circuit_value(task, "flux_bias", 0.25);
        squid.modulation_depth = circuit_value(task, "modulation_depth", 0.0, true);
        squid.drive_frequency = hz_to_angular(circuit_value(task, "drive_frequency_hz", 0.0));
        const SquidEffective eff = squid_effective(squid);
        emit("omega0_hz", angular_to_hz(eff.omega0), "hz");
        emit("g_aa_hz", angular_to_hz(eff.g_aa), "hz");
        emit("omega_aa_hz", angular_to_hz(eff.Omega_aa), "hz");
    } else if (task.circuit_kind == "double-pump") {
        DoublePumpParams params;
        params.phi_a_zpf = circuit_value(task, "phi_a_zpf", 0.0, true);
        params.phi_c_zpf = circuit_value(task, "phi_c_zpf", 0.0, true);
        params.phi_q_zpf = circuit_value(task, "phi_q_zpf", 0.0, true);
        params.josephson_energy = circuit_value(task, "e_j_hz", 0.0, true) * two_pi * hbar;
        params.pump_strength = hz_to_angular(circuit_value(task, "eps_p_hz", 0.0, true));
        params.drive_strength = hz_to_angular(circuit_value(task, "eps_c_hz", 0.0));
        params.omega_a = hz_to_angular(circuit_value(task, "omega_a_hz", 0.0, true));
        params.omega_c = hz_to_angular(circuit_value(task, "omega_c_hz", 0.0, true));
        params.kappa_c = hz_to_angular(circuit_value(task, "kappa_c_hz", 0.0, true));
        const DoublePumpEffective eff = double_pump_effective(params);
        emit("chi_aa_hz", angular_to_hz(eff.chi_aa), "hz");
        emit("chi_cc_hz", angular_to_hz(eff.chi_cc), "hz");
        emit("chi_ac_hz", angular_to_hz(eff.chi_ac), "hz");
        emit("g2_abs_hz", angular_to_hz(std::abs(eff.g2)), "hz");
        emit("g2_phase_rad", std::arg(eff.g2), "rad");
        emit("omega_p_hz", angular_to_hz(eff.omega_p), "hz");
        emit("omega_d_hz", angular_to_hz(eff.omega_d), "hz");
    } else if (task.circuit_kind == "jrm") {
        JrmPump pump;
        pump.pump_amplitude = circuit_value(task, "pump_amplitude_sqrt_flux", 0.0, true);
        pump.pump_phase = circuit_value(task, "pump_phase_rad", 0.0);
        pump.Omega = hz_to_angular(circuit_value(task, "omega_pump_hz", 0.0, true));
        pump.omega_c = hz_to_angular(circuit_value(task, "omega_c_hz", 0.0, true));
        pump.kappa_c = hz_to_angular(circuit_value(task, "kappa_c_hz", 0.0, true));
        const double g3 = hz_to_angular(circuit_value(task, "g3_hz", 0.0, true));
        const JrmEffective eff = jrm_effective(g3, pump);
        emit("g_ab_hz", angular_to_hz(eff.g_ab), "hz");
        emit("omega_ab_hz", angular_to_hz(eff.Omega_ab), "hz");
        emit("theta_rad", eff.theta, "rad");
    } else {
        throw ConfigError("config error at /task/circuit/kind: unknown circuit \"" +
                          task.circuit_kind + "\"");
    }
    result.files.push_back(path);
}

}  // namespace

const char* paramp_version() { return PARAMP_VERSION; }

RunResult run_experiment(const ExperimentConfig& config_in, const std::string& out_dir,
                         long seed_override) {
    ExperimentConfig config = config_in;
    if (seed_override >= 0) {
        config.numerics.seed = static_cast<std::uint64_t>(seed_override);
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw OutputError("cannot create output directory: " + out_dir);
    }

    RunResult result;
    switch (config.task.kind) {
        case TaskKind::Scatter: run_scatter(config, out_dir, result); break;
        case TaskKind::GainSweep:
        case TaskKind::PoutSweep: run_gain_or_pout_sweep(config, out_dir, result); break;
        case TaskKind::ThresholdSweep: run_threshold_sweep(config, out_dir, result); break;
        case TaskKind::Wigner: run_wigner(config, out_dir, result); break;
        case TaskKind::Mc: run_mc(config, out_dir, result); break;
        case TaskKind::CircuitParams: run_circuit_params(config, out_dir, result); break;
    }
    write_manifest(config, out_dir, result);
    return result;
}

}  // namespace paramp
