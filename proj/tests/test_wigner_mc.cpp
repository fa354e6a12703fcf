#include <doctest.h>

#include <cmath>

#include "paramp/depletion.hpp"
#include "paramp/fluctuations.hpp"
#include "paramp/model.hpp"
#include "paramp/semiclassical.hpp"
#include "paramp/wigner_mc.hpp"

using namespace paramp;

namespace {

// Dimensionless test models: kappa_a = 1, so times are in units of 1/kappa_a
// and fluxes in photons per 1/kappa_a.
AmplifierModel dpa_unit(double np_thr) {
    AmplifierModel model;
    model.topology = Topology::Degenerate;
    model.signal_mode = {1000.0, 1.0};
    model.pump_mode = {2000.0, 3.0};
    model.coupling = 0.25 / std::sqrt(np_thr);  // kappa_a/(4 sqrt(np))
    return model;
}

AmplifierModel ndpa_unit(double np_thr) {
    AmplifierModel model;
    model.topology = Topology::NonDegenerate;
    model.signal_mode = {1200.0, 1.0};
    model.idler_mode = ModeParams{800.0, 1.0};
    model.pump_mode = {2000.0, 3.0};
    model.coupling = 0.5 / std::sqrt(np_thr);  // sqrt(ka kb)/(2 sqrt(np))
    return model;
}

DriveConditions make_drive(const AmplifierModel& model, double pump_flux, double signal_flux,
                           double signal_phase = 0.0) {
    DriveConditions drive;
    drive.pump_flux_amplitude = std::sqrt(pump_flux);
    drive.pump_frequency = model.degenerate()
        ? 2.0 * model.signal_mode.omega
        : model.signal_mode.omega + model.idler_mode->omega;
    drive.signal_frequency = model.signal_mode.omega;
    drive.signal_flux = signal_flux;
    drive.signal_phase = signal_phase;
    return drive;
}

}  // namespace

TEST_CASE("vacuum ensemble: quadrature variances 1/4 within errors") {
    const AmplifierModel model = dpa_unit(1e4);
    const DriveConditions drive = make_drive(model, 0.0, 0.0);
    EnsembleConfig config;
    config.n_trajectories = 4000;
    config.burn_in = 10.0;
    config.t_final = 14.0;
    config.n_samples = 2;
    const TrajectoryEnsemble ensemble = simulate(model, drive, config);
    const SampleCovariance stats = sample_covariance(ensemble);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(stats.covariance(i, i) - 0.25) <
              3.0 * std::max(stats.covariance_se(i, i), 1e-3));
        CHECK(std::abs(stats.mean(i)) < 4.0 * std::max(stats.mean_se(i), 1e-3));
    }
}

TEST_CASE("determinism: same seed gives bit-identical samples for any worker count") {
    const AmplifierModel model = dpa_unit(400.0);
    const DriveConditions drive = make_drive(model, 0.5 * zero_signal_threshold_flux(model),
                                             0.3, two_pi / 4.0);
    EnsembleConfig config;
    config.n_trajectories = 64;
    config.burn_in = 4.0;
    config.t_final = 6.0;
    config.n_samples = 3;
    config.master_seed = 1234;

    config.n_threads = 1;
    const TrajectoryEnsemble one = simulate(model, drive, config);
    config.n_threads = 2;
    const TrajectoryEnsemble two = simulate(model, drive, config);
    config.n_threads = 3;
    const TrajectoryEnsemble three = simulate(model, drive, config);
    REQUIRE(one.samples.size() == two.samples.size());
    for (size_t i = 0; i < one.samples.size(); ++i) {
        CHECK(one.samples[i] == two.samples[i]);
        CHECK(one.samples[i] == three.samples[i]);
    }

    // the midpoint integrator is deterministic in the same way
    config.integrator = SdeIntegrator::Heun;
    config.n_threads = 1;
    const TrajectoryEnsemble heun_one = simulate(model, drive, config);
    config.n_threads = 2;
    const TrajectoryEnsemble heun_two = simulate(model, drive, config);
    bool heun_differs_from_euler = false;
    for (size_t i = 0; i < heun_one.samples.size(); ++i) {
        CHECK(heun_one.samples[i] == heun_two.samples[i]);
        if (heun_one.samples[i] != one.samples[i]) heun_differs_from_euler = true;
    }
    CHECK(heun_differs_from_euler);

    config.master_seed = 77;
    const TrajectoryEnsemble other = simulate(model, drive, config);
    bool any_different = false;
    for (size_t i = 0; i < one.samples.size() && !any_different; ++i) {
        any_different = one.samples[i] != other.samples[i];
    }
    CHECK(any_different);
}

TEST_CASE("step halving shifts observables by less than a standard error") {
    const AmplifierModel model = dpa_unit(400.0);
    const DriveConditions drive =
        make_drive(model, 0.36 * zero_signal_threshold_flux(model), 0.0);
    EnsembleConfig config;
    config.n_trajectories = 6000;
    config.burn_in = 12.0;
    config.t_final = 16.0;
    config.n_samples = 2;
    const TrajectoryEnsemble coarse = simulate(model, drive, config);
    config.dt = coarse.dt / 2.0;
    const TrajectoryEnsemble fine = simulate(model, drive, config);
    const SampleCovariance stats_coarse = sample_covariance(coarse);
    const SampleCovariance stats_fine = sample_covariance(fine);
    for (int i : {0, 2}) {
        const double se = std::hypot(stats_coarse.covariance_se(i, i),
                                     stats_fine.covariance_se(i, i));
        CHECK(std::abs(stats_coarse.covariance(i, i) - stats_fine.covariance(i, i)) <
              2.0 * se);
    }
}

TEST_CASE("sample covariance matches the lyapunov covariance at stable points") {
    const AmplifierModel model = dpa_unit(1e4);
    const double p_thr = zero_signal_threshold_flux(model);
    for (double pump_fraction : {0.25, 0.49}) {
        const DriveConditions drive = make_drive(model, pump_fraction * p_thr, 0.0);
        const std::vector<SteadyState> states = steady_states(model, drive);
        REQUIRE(states.size() == 1);
        FluctuationState fluc = assemble_fokker_planck(model, states[0]);
        steady_covariance(fluc);
        const Eigen::MatrixXd expected = fluc.lab_covariance();

        EnsembleConfig config;
        config.n_trajectories = 6000;
        config.burn_in = 20.0 / (1.0 - std::sqrt(pump_fraction));
        config.t_final = config.burn_in * 1.3;
        config.n_samples = 2;
        const TrajectoryEnsemble ensemble = simulate(model, drive, config);
        const SampleCovariance stats = sample_covariance(ensemble);
        for (int i = 0; i < 4; ++i) {
            for (int j = i; j < 4; ++j) {
                const double se = std::max(stats.covariance_se(i, j), 2e-3);
                CHECK(std::abs(stats.covariance(i, j) - expected(i, j)) < 4.0 * se);
            }
        }
    }
}

TEST_CASE("output flux: passive reflection and closed vacuum") {
    const AmplifierModel model = dpa_unit(1e4);
    // pump off, coherent signal: everything reflects
    const double p_in = 25.0;
    const DriveConditions drive = make_drive(model, 0.0, p_in);
    EnsembleConfig config;
    config.n_trajectories = 4000;
    config.burn_in = 12.0;
    config.t_final = 16.0;
    config.n_samples = 2;
    const TrajectoryEnsemble ensemble = simulate(model, drive, config);
    const FluxEstimate estimate = output_flux_estimate(ensemble, model, drive);
    CHECK(std::abs(estimate.flux - p_in) < 3.0 * std::max(estimate.std_error, 0.02 * p_in));

    // zero inputs: the ordering correction cancels the vacuum exactly
    const DriveConditions dark = make_drive(model, 0.0, 0.0);
    const TrajectoryEnsemble vacuum = simulate(model, dark, config);
    const FluxEstimate zero = output_flux_estimate(vacuum, model, dark);
    CHECK(std::abs(zero.flux) < 3.0 * std::max(zero.std_error, 1e-2));
}

TEST_CASE("linear regime gain matches the stiff-pump formula within 5%") {
    const AmplifierModel model = ndpa_unit(1e4);
    const double rho0 = 0.6;
    const double p_thr = zero_signal_threshold_flux(model);
    const double p_in = 4.0;
    const DriveConditions drive = make_drive(model, rho0 * rho0 * p_thr, p_in);
    EnsembleConfig config;
    config.n_trajectories = 3000;
    config.burn_in = 40.0;
    config.t_final = 50.0;
    config.n_samples = 2;
    const TrajectoryEnsemble ensemble = simulate(model, drive, config);
    const SampleCovariance stats = sample_covariance(ensemble);
    const complex mean_alpha(stats.mean(0), stats.mean(3));
    const complex a_out = -std::sqrt(p_in) + std::sqrt(model.signal_mode.kappa) * mean_alpha;
    const double gain = std::norm(a_out) / p_in;
    CHECK(gain == doctest::Approx(ideal_gain(rho0)).epsilon(0.05));
}

TEST_CASE("ndpa operating point: output flux matches the depletion formula within 5%") {
    const AmplifierModel model = ndpa_unit(1e4);
    const DriveConditions drive = make_drive(
        model, std::pow(rho_for_gain(std::pow(10.0, 1.5)), 2) * zero_signal_threshold_flux(model),
        30.0);  // 15 dB undepleted, strong enough signal to deplete the pump a little
    const DepletedOperatingPoint point = solve_rho(model, drive);
    CHECK(point.converged);

    EnsembleConfig config;
    config.n_trajectories = 8000;
    config.burn_in = 110.0;
    config.t_final = 130.0;
    config.n_samples = 2;
    const TrajectoryEnsemble ensemble = simulate(model, drive, config);
    const FluxEstimate estimate = output_flux_estimate(ensemble, model, drive);
    CHECK(estimate.flux == doctest::Approx(point.p_out_total).epsilon(0.05));
}

TEST_CASE("kurtosis contrast: quartic-saturated at threshold, gaussian below") {
    const AmplifierModel model = dpa_unit(25.0);
    const double p_thr = zero_signal_threshold_flux(model);
    EnsembleConfig config;
    config.n_trajectories = 3000;
    config.burn_in = 360.0;
    config.t_final = 420.0;
    config.n_samples = 2;
    const TrajectoryEnsemble at_threshold = simulate(model, make_drive(model, p_thr, 0.0), config);
    // amplified quadrature is Im(alpha) for pump_phase = 0
    const double kurt_threshold = excess_kurtosis(at_threshold, 0, 1);
    CHECK(std::abs(kurt_threshold) > 0.3);
    // the saturated distribution is flat-topped: kurtosis below gaussian
    CHECK(kurt_threshold < 0.0);

    EnsembleConfig below_config = config;
    below_config.burn_in = 40.0;
    below_config.t_final = 60.0;
    const TrajectoryEnsemble below =
        simulate(model, make_drive(model, 0.25 * p_thr, 0.0), below_config);
    CHECK(std::abs(excess_kurtosis(below, 0, 1)) < 0.15);
}

TEST_CASE("incident signal pins the phase above threshold") {
    const AmplifierModel model = ndpa_unit(400.0);
    const double p_thr = zero_signal_threshold_flux(model);
    EnsembleConfig config;
    config.n_trajectories = 800;
    config.burn_in = 150.0;
    config.t_final = 180.0;
    config.n_samples = 2;
    // strong signal above threshold: one locked lobe, no phase diffusion
    const TrajectoryEnsemble locked =
        simulate(model, make_drive(model, 1.3 * p_thr, 2.0), config);
    CHECK(phase_spread(locked, 0) < 0.2);
}

TEST_CASE("histogram export carries axes and counts") {
    const AmplifierModel model = dpa_unit(400.0);
    const DriveConditions drive = make_drive(model, 0.0, 4.0);
    EnsembleConfig config;
    config.n_trajectories = 500;
    config.burn_in = 8.0;
    config.t_final = 10.0;
    config.n_samples = 2;
    const TrajectoryEnsemble ensemble = simulate(model, drive, config);
    const Histogram2D hist = histogram2d(ensemble, 0, 32, 24);
    CHECK(hist.nx == 32);
    CHECK(hist.ny == 24);
    double total = 0.0;
    for (double c : hist.counts) total += c;
    CHECK(total == doctest::Approx(500.0 * 2.0));

    const std::string text = histogram_to_text(hist);
    CHECK(text.find("# x_axis") == 0);
    CHECK(text.find("# y_axis") != std::string::npos);
}

TEST_CASE("too few samples for a covariance estimate") {
    const AmplifierModel model = dpa_unit(400.0);
    EnsembleConfig config;
    config.n_trajectories = 20;
    config.burn_in = 1.0;
    config.t_final = 2.0;
    const TrajectoryEnsemble tiny = simulate(model, make_drive(model, 0.0, 0.0), config);
    CHECK_THROWS_AS(sample_covariance(tiny), InsufficientSamples);
    CHECK_THROWS_AS(excess_kurtosis(tiny, 0, 0), InsufficientSamples);
}

TEST_CASE("guards: instability, detuned pump, dt limit") {
    AmplifierModel model = dpa_unit(400.0);
    DriveConditions drive = make_drive(model, 25.0 * zero_signal_threshold_flux(model), 0.0);
    EnsembleConfig config;
    config.n_trajectories = 10;
    config.burn_in = 2.0;
    config.t_final = 4.0;
    config.amplitude_guard = 5.0;  // tight guard: the oscillating mode trips it
    CHECK_THROWS_AS(simulate(model, drive, config), StepInstability);

    DriveConditions detuned = make_drive(model, 1.0, 0.0);
    detuned.pump_frequency *= 1.01;
    EnsembleConfig ok;
    ok.n_trajectories = 4;
    ok.burn_in = 0.5;
    ok.t_final = 1.0;
    CHECK_THROWS_AS(simulate(model, detuned, ok), InvalidParameter);

    EnsembleConfig bad_dt = ok;
    bad_dt.dt = 1.0;  // way beyond 0.01/kappa_c
    CHECK_THROWS_AS(simulate(model, make_drive(model, 1.0, 0.0), bad_dt), InvalidParameter);
}
