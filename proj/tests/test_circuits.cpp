#include <doctest.h>

#include <cmath>

#include "paramp/circuits.hpp"
#include "paramp/model.hpp"
#include "paramp/scattering.hpp"

using namespace paramp;

namespace {

JunctionParams test_junction() {
    JunctionParams junction;
    junction.josephson_energy = 6.62607015e-34 * 50e9;  // h * 50 GHz
    junction.total_capacitance = 10e-12;
    return junction;
}

}  // namespace

TEST_CASE("junction derived quantities") {
    const JunctionParams junction = test_junction();
    const double lj = junction.junction_inductance();
    // E_J = (hbar/2e)^2 / L_J round trip
    const double phi0_red = hbar / (2.0 * electron_charge);
    CHECK(phi0_red * phi0_red / lj == doctest::Approx(junction.josephson_energy).epsilon(1e-12));
    CHECK(junction.phi_zpf() > 0.0);
    CHECK(junction.phi_zpf() < 0.3);
    junction.validate();
}

TEST_CASE("duffing: zero drive, negative kerr, downward pull") {
    const JunctionParams junction = test_junction();
    DuffingDrive drive;
    drive.kappa_a = hz_to_angular(30e6);
    drive.pump_amplitude = 0.0;

    DuffingEffective idle = duffing_effective(junction, drive);
    CHECK(idle.kerr < 0.0);
    CHECK(idle.g_aa == 0.0);
    CHECK(idle.omega_a_eff == idle.omega_bare);
    drive.Omega = idle.omega_bare;

    double previous_omega = idle.omega_bare;
    double previous_g = 0.0;
    for (double amp : {1e3, 2e3, 4e3, 8e3}) {
        drive.pump_amplitude = amp;
        const DuffingEffective eff = duffing_effective(junction, drive);
        REQUIRE(!eff.bistable);
        CHECK(eff.omega_a_eff < previous_omega);  // K < 0 pulls the band down
        CHECK(eff.g_aa > previous_g);
        CHECK(eff.Omega_aa == doctest::Approx(2.0 * drive.Omega));
        previous_omega = eff.omega_a_eff;
        previous_g = eff.g_aa;
    }
}

TEST_CASE("duffing weak drive matches the linear cavity response") {
    const JunctionParams junction = test_junction();
    DuffingDrive drive;
    drive.kappa_a = hz_to_angular(30e6);
    const double omega_bare = duffing_effective(junction, drive).omega_bare;
    for (double detune : {-1.0, 0.0, 0.8}) {
        drive.Omega = omega_bare + detune * drive.kappa_a;
        drive.pump_amplitude = 10.0;  // few-photon drive: the Kerr shift is negligible
        const DuffingEffective eff = duffing_effective(junction, drive);
        const double expected = drive.kappa_a * drive.pump_amplitude * drive.pump_amplitude /
                                (std::pow(drive.Omega - omega_bare, 2) +
                                 0.25 * drive.kappa_a * drive.kappa_a);
        CHECK(std::norm(eff.alpha) == doctest::Approx(expected).epsilon(1e-3));
        // g_aa = |K| |alpha|^2 / 2
        CHECK(eff.g_aa ==
              doctest::Approx(0.5 * std::abs(eff.kerr) * std::norm(eff.alpha)).epsilon(1e-9));
    }
}

TEST_CASE("duffing bistability is reported, not resolved") {
    const JunctionParams junction = test_junction();
    DuffingDrive drive;
    drive.kappa_a = hz_to_angular(30e6);
    const DuffingEffective idle = duffing_effective(junction, drive);
    drive.Omega = idle.omega_bare - 2.0 * drive.kappa_a;  // red detuned with K < 0

    bool found_bistable = false;
    complex previous_alpha = 0.0;
    for (double power_scale = 0.1; power_scale < 600.0; power_scale *= 1.3) {
        drive.pump_amplitude =
            std::sqrt(power_scale * drive.kappa_a);  // a few intracavity photons upward
        const DuffingEffective eff = duffing_effective(junction, drive);
        if (eff.bistable) {
            found_bistable = true;
            CHECK(eff.branch_photon_numbers.size() == 3);
            break;
        }
        // continuation keeps the branch continuous in the drive
        if (std::abs(previous_alpha) > 0.0) {
            CHECK(std::abs(eff.alpha - previous_alpha) < 0.8 * std::abs(eff.alpha) + 1.0);
        }
        previous_alpha = eff.alpha;
    }
    CHECK(found_bistable);
}

TEST_CASE("squid effective parameters") {
    SquidParams squid;
    squid.junction_inductance = 0.3e-9;
    squid.total_capacitance = 0.4e-12;
    squid.flux_bias = 0.25;
    squid.modulation_depth = 0.0;

    SquidEffective quiet = squid_effective(squid);
    CHECK(quiet.g_aa == 0.0);
    // L_J^SQUID = sqrt(2) L_J at a quarter flux quantum
    const double expected_omega =
        1.0 / std::sqrt(squid.total_capacitance * squid.junction_inductance * std::sqrt(2.0));
    CHECK(quiet.omega0 == doctest::Approx(expected_omega).epsilon(1e-12));
    CHECK(quiet.Omega_aa == doctest::Approx(2.0 * quiet.omega0));

    squid.modulation_depth = 0.05;
    const SquidEffective eff = squid_effective(squid);
    // g_aa / omega0 = pi epsilon / 16
    CHECK(eff.g_aa / eff.omega0 ==
          doctest::Approx(two_pi / 2.0 * squid.modulation_depth / 16.0).epsilon(1e-12));

    squid.flux_bias = 0.499;
    CHECK_THROWS_AS(squid_effective(squid), FluxNearHalfQuantum);
}

TEST_CASE("double pump: kerr-free limit and pump-off limit") {
    DoublePumpParams params;
    params.phi_a_zpf = 1e-4;  // essentially Kerr-free
    params.phi_c_zpf = 1e-4;
    params.phi_q_zpf = 0.2;
    params.josephson_energy = 6.62607015e-34 * 20e9;
    params.pump_strength = hz_to_angular(20e6);
    params.drive_strength = hz_to_angular(0.1e6);
    params.omega_a = hz_to_angular(6e9);
    params.omega_c = hz_to_angular(9e9);
    params.kappa_c = hz_to_angular(20e6);

    const DoublePumpEffective kerr_free = double_pump_effective(params);
    const double scale = params.omega_c;
    CHECK(std::abs(kerr_free.omega_d - params.omega_c) < 1e-8 * scale);
    CHECK(std::abs(2.0 * params.omega_a - kerr_free.omega_p - kerr_free.omega_d) < 1e-8 * scale);

    // with real Kerr terms, the matching includes the AC-Stark shifts
    params.phi_a_zpf = 0.08;
    params.phi_c_zpf = 0.12;
    const DoublePumpEffective eff = double_pump_effective(params);
    const double xi2 = std::norm(eff.xi_p);
    CHECK(std::abs(params.omega_c - eff.omega_d - eff.chi_cc - eff.chi_cc * xi2) < 1e-8 * scale);
    CHECK(std::abs(params.omega_a - 0.5 * (eff.omega_d + eff.omega_p) - eff.chi_aa -
                   eff.chi_ac * xi2) < 1e-8 * scale);
    // |g2| = chi_ac |eps_p| / (2 sqrt(kappa_c^2/4 + (omega_c - omega_p)^2))
    const double expected_g2 =
        eff.chi_ac * params.pump_strength /
        (2.0 * std::sqrt(0.25 * params.kappa_c * params.kappa_c +
                         std::pow(params.omega_c - eff.omega_p, 2)));
    CHECK(std::abs(eff.g2) == doctest::Approx(expected_g2).epsilon(1e-9));

    params.pump_strength = 0.0;
    const DoublePumpEffective off = double_pump_effective(params);
    CHECK(std::abs(off.g2) == 0.0);
    CHECK(std::abs(off.omega_d - (params.omega_c - off.chi_cc)) < 1e-8 * scale);
}

TEST_CASE("jrm effective coupling") {
    JrmPump pump;
    pump.omega_c = hz_to_angular(17e9);
    pump.kappa_c = hz_to_angular(600e6);
    pump.Omega = pump.omega_c;
    pump.pump_amplitude = 0.0;
    const double g3 = hz_to_angular(0.1e6);

    CHECK(jrm_effective(g3, pump).g_ab == 0.0);

    pump.pump_amplitude = 3e6;
    const JrmEffective tuned = jrm_effective(g3, pump);
    CHECK(tuned.g_ab ==
          doctest::Approx(g3 * pump.pump_amplitude / std::sqrt(pump.kappa_c)).epsilon(1e-12));
    CHECK(tuned.Omega_ab == pump.Omega);

    // detuning by kappa_c reduces the coupling by 1/sqrt(2)
    pump.Omega = pump.omega_c + pump.kappa_c;
    const JrmEffective detuned = jrm_effective(g3, pump);
    CHECK(detuned.g_ab == doctest::Approx(tuned.g_ab / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("circuit-to-scattering pipeline produces a dimensionless gain") {
    // JRM pump -> effective g_ab -> reduced coupling -> stiff-pump gain.
    AmplifierModel model;
    model.topology = Topology::NonDegenerate;
    model.signal_mode = {hz_to_angular(10e9), hz_to_angular(100e6)};
    model.idler_mode = ModeParams{hz_to_angular(7e9), hz_to_angular(100e6)};
    model.pump_mode = {hz_to_angular(17e9), hz_to_angular(600e6)};
    model.coupling = hz_to_angular(0.1e6);

    JrmPump pump;
    pump.omega_c = model.pump_mode.omega;
    pump.kappa_c = model.pump_mode.kappa;
    pump.Omega = model.signal_mode.omega + model.idler_mode->omega;
    pump.pump_amplitude = 5e6;

    const JrmEffective eff = jrm_effective(model.coupling, pump);
    EffectiveDrive drive;
    drive.g = eff.g_ab;
    drive.Omega = eff.Omega_ab;
    drive.theta = eff.theta;
    const double rho = rho_ndpa_effective(eff.g_ab, model.signal_mode.kappa,
                                          model.idler_mode->kappa);
    REQUIRE(rho < 1.0);
    const ScatteringBlock block = ndpa_scattering(model, drive, model.signal_mode.omega);
    CHECK(std::norm(block.r_ss()) == doctest::Approx(ideal_gain(rho)).epsilon(1e-9));
}
