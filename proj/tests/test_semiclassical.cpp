#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "paramp/depletion.hpp"
#include "paramp/fluctuations.hpp"
#include "paramp/model.hpp"
#include "paramp/semiclassical.hpp"

using namespace paramp;

namespace {

ModeParams mode(double f_ghz, double kappa_mhz) {
    ModeParams m;
    m.omega = hz_to_angular(f_ghz * 1e9);
    m.kappa = hz_to_angular(kappa_mhz * 1e6);
    return m;
}

AmplifierModel ndpa_model() {
    AmplifierModel model;
    model.topology = Topology::NonDegenerate;
    model.signal_mode = mode(10.0, 100.0);
    model.idler_mode = mode(7.0, 100.0);
    model.pump_mode = mode(17.0, 600.0);
    model.coupling = hz_to_angular(0.1e6);
    return model;
}

AmplifierModel dpa_model() {
    AmplifierModel model;
    model.topology = Topology::Degenerate;
    model.signal_mode = mode(10.0, 100.0);
    model.pump_mode = mode(20.0, 600.0);
    model.coupling = hz_to_angular(0.1e6);
    return model;
}

DriveConditions make_drive(const AmplifierModel& model, double pump_flux, double signal_flux,
                           double signal_phase) {
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

// Oracle: RK4 time integration of the scaled mode equations.
std::vector<complex> integrate(const AmplifierModel& model, const ScaledDrive& drive,
                               std::vector<complex> state, double t_total) {
    const double kappa_fast = model.pump_mode.kappa;
    const double dt = 0.002 / kappa_fast;
    const int steps = static_cast<int>(t_total / dt);
    const size_t m = state.size();
    std::vector<complex> k1(m), k2(m), k3(m), k4(m), tmp(m);
    for (int s = 0; s < steps; ++s) {
        scaled_field(model, drive, state, k1);
        for (size_t i = 0; i < m; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
        scaled_field(model, drive, tmp, k2);
        for (size_t i = 0; i < m; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
        scaled_field(model, drive, tmp, k3);
        for (size_t i = 0; i < m; ++i) tmp[i] = state[i] + dt * k3[i];
        scaled_field(model, drive, tmp, k4);
        for (size_t i = 0; i < m; ++i) {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    return state;
}

double distance(const std::vector<complex>& a, const std::vector<complex>& b) {
    double d2 = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d2 += std::norm(a[i] - b[i]);
    return std::sqrt(d2);
}

}  // namespace

TEST_CASE("zero drive: unique trivial stable state") {
    for (const AmplifierModel& model : {ndpa_model(), dpa_model()}) {
        const DriveConditions drive = make_drive(model, 0.0, 0.0, 0.0);
        const std::vector<SteadyState> states = steady_states(model, drive);
        REQUIRE(states.size() == 1);
        CHECK(states[0].stability == Stability::Stable);
        for (const complex& amp : states[0].amplitudes) {
            CHECK(std::abs(amp) < 1e-9);
        }
    }
}

TEST_CASE("below threshold, zero signal: unique stable state with pumped c-mode") {
    for (const AmplifierModel& model : {ndpa_model(), dpa_model()}) {
        const double p_thr = zero_signal_threshold_flux(model);
        const DriveConditions drive = make_drive(model, 0.64 * p_thr, 0.0, 0.0);
        const std::vector<SteadyState> states = steady_states(model, drive);
        REQUIRE(states.size() == 1);
        CHECK(states[0].stability == Stability::Stable);
        // scaled pump amplitude modulus equals rho0 below threshold
        CHECK(std::abs(states[0].amplitudes.back()) == doctest::Approx(0.8).epsilon(1e-9));
        CHECK(std::abs(states[0].amplitudes.front()) < 1e-9);
    }
}

TEST_CASE("dpa above threshold, zero signal: pi-symmetric oscillating pair") {
    const AmplifierModel model = dpa_model();
    const double p_thr = zero_signal_threshold_flux(model);
    const DriveConditions drive = make_drive(model, 1.44 * p_thr, 0.0, 0.0);
    const std::vector<SteadyState> states = steady_states(model, drive);

    int n_stable = 0;
    const SteadyState* trivial = nullptr;
    std::vector<const SteadyState*> oscillating;
    for (const SteadyState& s : states) {
        if (std::abs(s.amplitudes[0]) < 1e-9) {
            trivial = &s;
        } else {
            oscillating.push_back(&s);
        }
        if (s.stability == Stability::Stable) ++n_stable;
    }
    REQUIRE(trivial != nullptr);
    CHECK(trivial->stability == Stability::Unstable);
    REQUIRE(oscillating.size() == 2);
    CHECK(n_stable == 2);
    // equal magnitude, opposite sign
    CHECK(std::abs(oscillating[0]->amplitudes[0] + oscillating[1]->amplitudes[0]) < 1e-8);
    // pump clamps at the threshold value |c| = 1
    CHECK(std::abs(oscillating[0]->amplitudes[1]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ndpa above threshold, zero signal: trivial state destabilizes") {
    const AmplifierModel model = ndpa_model();
    const double p_thr = zero_signal_threshold_flux(model);
    const DriveConditions drive = make_drive(model, 1.2 * p_thr, 0.0, 0.0);
    const std::vector<SteadyState> states = steady_states(model, drive);

    const SteadyState* trivial = nullptr;
    int n_oscillating = 0;
    for (const SteadyState& s : states) {
        if (std::abs(s.amplitudes[0]) < 1e-9) {
            trivial = &s;
        } else {
            ++n_oscillating;
            // phase freedom: the oscillating manifold is marginal along the orbit
            CHECK(s.stability != Stability::Unstable);
            // |a|^2 kappa_a = |b|^2 kappa_b balance
            const double na = std::norm(s.amplitudes[0]) * model.signal_mode.kappa;
            const double nb = std::norm(s.amplitudes[1]) * model.idler_mode->kappa;
            CHECK(na == doctest::Approx(nb).epsilon(1e-6));
        }
    }
    REQUIRE(trivial != nullptr);
    CHECK(trivial->stability == Stability::Unstable);
    CHECK(n_oscillating >= 2);
}

TEST_CASE("steady states agree with long-time integration (oracle, random sets)") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> pump_frac(0.1, 0.9);
    std::uniform_real_distribution<double> signal_dbm(-130.0, -100.0);
    std::uniform_real_distribution<double> phase(0.0, two_pi);

    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const AmplifierModel model = (trial % 2 == 0) ? ndpa_model() : dpa_model();
        const double p_thr = zero_signal_threshold_flux(model);
        const DriveConditions drive =
            make_drive(model, pump_frac(rng) * p_thr,
                       dbm_to_flux(signal_dbm(rng), model.signal_mode.omega), phase(rng));
        const ScaledDrive scaled = scaled_drive(model, drive);
        const std::vector<SteadyState> states = steady_states(model, drive);
        for (const SteadyState& s : states) {
            CHECK(s.residual < 1e-10);
            if (s.stability != Stability::Stable) continue;
            double slowest = model.pump_mode.kappa;
            for (const complex& ev : s.jacobian_eigenvalues) {
                slowest = std::min(slowest, std::abs(ev.real()));
            }
            // perturb and integrate back over ~16 relaxation times
            std::vector<complex> kicked = s.amplitudes;
            for (complex& amp : kicked) {
                amp += complex(0.02 * (pump_frac(rng) - 0.5), 0.02 * (pump_frac(rng) - 0.5));
            }
            const std::vector<complex> settled = integrate(model, scaled, kicked, 16.0 / slowest);
            CHECK(distance(settled, s.amplitudes) < 1e-6);
            ++checked;
        }
    }
    CHECK(checked >= 20);
}

TEST_CASE("unstable states repel trajectories (oracle)") {
    const AmplifierModel model = dpa_model();
    const double p_thr = zero_signal_threshold_flux(model);
    const DriveConditions drive = make_drive(model, 1.44 * p_thr, 0.0, 0.0);
    const ScaledDrive scaled = scaled_drive(model, drive);
    for (const SteadyState& s : steady_states(model, drive)) {
        if (s.stability != Stability::Unstable) continue;
        std::vector<complex> kicked = s.amplitudes;
        kicked[0] += complex(1e-4, 1e-4);  // kick both quadratures
        const std::vector<complex> settled =
            integrate(model, scaled, kicked, 80.0 / model.signal_mode.kappa);
        CHECK(distance(settled, s.amplitudes) > 0.1);
    }
}

TEST_CASE("scaled and physical parameterizations map exactly") {
    const AmplifierModel model = ndpa_model();
    const double scale = amplitude_scale(model);
    CHECK(scale * scale == doctest::Approx(np_threshold_photons(model)).epsilon(1e-12));

    // A fixed point of the scaled field is a fixed point of the physical
    // trilinear equations: check the physical-unit residual directly.
    const DriveConditions drive =
        make_drive(model, 0.5 * zero_signal_threshold_flux(model),
                   dbm_to_flux(-110.0, model.signal_mode.omega), 0.0);
    const std::vector<SteadyState> states = steady_states(model, drive);
    REQUIRE(!states.empty());
    const std::vector<complex>& a = states[0].amplitudes;
    const double g3 = model.coupling;
    const complex alpha = scale * a[0], beta = scale * a[1], gamma = scale * a[2];
    const complex a_in = std::sqrt(drive.signal_flux);
    const complex c_in = drive.pump_flux_amplitude;
    const complex res_a = -0.5 * model.signal_mode.kappa * alpha -
                          g3 * std::conj(beta) * gamma +
                          std::sqrt(model.signal_mode.kappa) * a_in;
    const complex res_b = -0.5 * model.idler_mode->kappa * beta -
                          g3 * std::conj(alpha) * gamma;
    const complex res_c = -0.5 * model.pump_mode.kappa * gamma + g3 * alpha * beta +
                          std::sqrt(model.pump_mode.kappa) * c_in;
    const double norm = model.pump_mode.kappa * scale;
    CHECK(std::abs(res_a) / norm < 1e-9);
    CHECK(std::abs(res_b) / norm < 1e-9);
    CHECK(std::abs(res_c) / norm < 1e-9);
}

TEST_CASE("reflection gain of the steady state reproduces the ideal gain formula") {
    // sqrt(G) = (1 + c0^2)/(1 - c0^2) with c0 the depleted scaled pump amplitude.
    const AmplifierModel model = ndpa_model();
    const DriveConditions drive =
        make_drive(model, 0.49 * zero_signal_threshold_flux(model),
                   dbm_to_flux(-115.0, model.signal_mode.omega), 0.0);
    const std::vector<SteadyState> states = steady_states(model, drive);
    REQUIRE(states.size() == 1);
    const double scale = amplitude_scale(model);
    const complex alpha = scale * states[0].amplitudes[0];
    const complex a_in = std::sqrt(drive.signal_flux);
    const complex reflected = -a_in + std::sqrt(model.signal_mode.kappa) * alpha;
    const double rho_eff = std::abs(states[0].amplitudes[2]);
    CHECK(std::abs(reflected / a_in) ==
          doctest::Approx(std::sqrt(ideal_gain(rho_eff))).epsilon(1e-9));
}

TEST_CASE("zero-signal threshold detection matches the analytic condition") {
    for (const AmplifierModel& model : {ndpa_model(), dpa_model()}) {
        const ThresholdResult result = oscillation_threshold(model, 0.0);
        REQUIRE(result.status == ThresholdStatus::Found);
        const double analytic = zero_signal_threshold_flux(model);
        CHECK(result.pump_flux_threshold == doctest::Approx(analytic).epsilon(0.01));
    }
}

TEST_CASE("threshold is monotone in signal power and eventually disappears") {
    const AmplifierModel model = dpa_model();
    const double carrier = model.signal_mode.omega;
    // A reduced pump-power cap keeps the endpoint inside a practical sweep.
    ThresholdOptions options;
    options.cap_db_above_zero_signal = 10.0;
    double previous = 0.0;
    bool disappeared = false;
    for (double dbm = -130.0; dbm <= -40.0; dbm += 10.0) {
        const ThresholdResult result =
            oscillation_threshold(model, dbm_to_flux(dbm, carrier), options);
        if (result.status == ThresholdStatus::Found) {
            CHECK(!disappeared);  // the oscillating region is a single interval
            CHECK(result.pump_flux_threshold >= previous * (1.0 - 1e-6));
            previous = result.pump_flux_threshold;
        } else {
            CHECK(result.status == ThresholdStatus::NoThreshold);
            disappeared = true;
        }
    }
    CHECK(previous > 0.0);
    CHECK(disappeared);
}

TEST_CASE("max output before oscillation sits >= 3 dB above the depleted 30 dB curve") {
    const AmplifierModel model = ndpa_model();
    const double p_in = dbm_to_flux(-100.0, model.signal_mode.omega);
    const double max_out = max_output_before_oscillation(model, p_in);

    DriveConditions drive = make_drive(model, 0.0, p_in, 0.0);
    drive.pump_flux_amplitude = pump_amplitude_for_rho0(model, rho_for_gain(1000.0));
    const DepletedOperatingPoint depleted = solve_rho(model, drive);
    CHECK(max_out > 2.0 * depleted.p_out_total);  // >= 3 dB gap
}
