#include <benchmark/benchmark.h>

#include <cmath>

#include "paramp/depletion.hpp"
#include "paramp/fluctuations.hpp"
#include "paramp/model.hpp"
#include "paramp/scattering.hpp"
#include "paramp/semiclassical.hpp"
#include "paramp/wigner_mc.hpp"

using namespace paramp;

namespace {

AmplifierModel ndpa_model() {
    AmplifierModel model;
    model.topology = Topology::NonDegenerate;
    model.signal_mode = {hz_to_angular(10e9), hz_to_angular(100e6)};
    model.idler_mode = ModeParams{hz_to_angular(7e9), hz_to_angular(100e6)};
    model.pump_mode = {hz_to_angular(17e9), hz_to_angular(600e6)};
    model.coupling = hz_to_angular(0.1e6);
    return model;
}

DriveConditions drive_at(const AmplifierModel& model, double gain_db, double p_in_dbm) {
    DriveConditions drive;
    drive.pump_flux_amplitude =
        pump_amplitude_for_rho0(model, rho_for_gain(std::pow(10.0, gain_db / 10.0)));
    drive.pump_frequency = model.degenerate()
        ? 2.0 * model.signal_mode.omega
        : model.signal_mode.omega + model.idler_mode->omega;
    drive.signal_frequency = model.signal_mode.omega;
    drive.signal_flux = dbm_to_flux(p_in_dbm, model.signal_mode.omega);
    return drive;
}

}  // namespace

static void BM_NdpaScattering(benchmark::State& state) {
    const AmplifierModel model = ndpa_model();
    EffectiveDrive drive;
    drive.g = 0.45 * std::sqrt(model.signal_mode.kappa * model.idler_mode->kappa);
    drive.Omega = model.signal_mode.omega + model.idler_mode->omega;
    double detune = -3.0;
    for (auto _ : state) {
        detune = detune > 3.0 ? -3.0 : detune + 1e-4;
        const double omega_s = model.signal_mode.omega + detune * model.signal_mode.kappa;
        benchmark::DoNotOptimize(ndpa_scattering(model, drive, omega_s));
    }
}
BENCHMARK(BM_NdpaScattering);

static void BM_SolveRhoDepleted(benchmark::State& state) {
    const AmplifierModel model = ndpa_model();
    const DriveConditions drive = drive_at(model, 20.0, -100.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_rho(model, drive));
    }
}
BENCHMARK(BM_SolveRhoDepleted);

static void BM_CompressionPoint(benchmark::State& state) {
    const AmplifierModel model = ndpa_model();
    const DriveConditions drive = drive_at(model, 20.0, -120.0);
    const double carrier = model.signal_mode.omega;
    for (auto _ : state) {
        benchmark::DoNotOptimize(compression_point(model, drive, 1.0,
                                                   dbm_to_flux(-170.0, carrier),
                                                   dbm_to_flux(-60.0, carrier)));
    }
}
BENCHMARK(BM_CompressionPoint);

static void BM_SteadyStates(benchmark::State& state) {
    const AmplifierModel model = ndpa_model();
    DriveConditions drive = drive_at(model, 0.0, -115.0);
    drive.pump_flux_amplitude = std::sqrt(1.2 * zero_signal_threshold_flux(model));
    for (auto _ : state) {
        benchmark::DoNotOptimize(steady_states(model, drive));
    }
}
BENCHMARK(BM_SteadyStates)->Unit(benchmark::kMillisecond);

static void BM_LyapunovCovariance(benchmark::State& state) {
    const AmplifierModel model = ndpa_model();
    const DriveConditions drive = drive_at(model, 14.0, -115.0);
    const std::vector<SteadyState> states = steady_states(model, drive);
    for (auto _ : state) {
        FluctuationState fluc = assemble_fokker_planck(model, states.front());
        benchmark::DoNotOptimize(steady_covariance(fluc));
    }
}
BENCHMARK(BM_LyapunovCovariance);

static void BM_WignerTrajectorySteps(benchmark::State& state) {
    AmplifierModel model;
    model.topology = Topology::Degenerate;
    model.signal_mode = {1000.0, 1.0};
    model.pump_mode = {2000.0, 3.0};
    model.coupling = 0.25 / 100.0;
    DriveConditions drive;
    drive.pump_frequency = 2000.0;
    drive.signal_frequency = 1000.0;
    drive.pump_flux_amplitude = std::sqrt(0.25 * zero_signal_threshold_flux(model));

    EnsembleConfig config;
    config.n_trajectories = 256;
    config.burn_in = 5.0;
    config.t_final = 10.0;
    config.n_threads = 1;
    long steps_per_run = 0;
    for (auto _ : state) {
        const TrajectoryEnsemble ensemble = simulate(model, drive, config);
        steps_per_run = std::lround(config.t_final / ensemble.dt) * config.n_trajectories;
        benchmark::DoNotOptimize(ensemble.samples.data());
    }
    state.SetItemsProcessed(state.iterations() * steps_per_run);
}
BENCHMARK(BM_WignerTrajectorySteps)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
