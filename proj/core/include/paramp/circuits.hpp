#pragma once

#include <optional>
#include <vector>

#include "paramp/model.hpp"

namespace paramp {

inline constexpr double electron_charge = 1.602176634e-19;  // C

// Single Josephson junction shunted by C_sigma (Duffing oscillator).
struct JunctionParams {
    double josephson_energy = 0.0;   // E_J (J)
    double total_capacitance = 0.0;  // C_sigma (F)

    double junction_inductance() const;  // L_J = (hbar/2e)^2 / E_J
    double phi_zpf() const;              // (2e^2/hbar)^{1/2} (L_J/C_sigma)^{1/4}
    void validate() const;
};

struct DuffingDrive {
    double pump_amplitude = 0.0;  // |alpha_in| ((photons/s)^{1/2})
    double pump_phase = 0.0;      // arg(alpha_in)
    double Omega = 0.0;           // drive frequency (rad/s)
    double kappa_a = 0.0;         // port coupling (rad/s)
};

struct DuffingEffective {
    double kerr = 0.0;          // K = -e^2/(2 hbar C_sigma), always negative
    double omega_bare = 0.0;    // omega_tilde_a = 1/sqrt(L_J C_sigma) + K
    double omega_a_eff = 0.0;   // omega_tilde_a + 2 K |alpha|^2
    double g_aa = 0.0;          // |K| |alpha|^2 / 2
    double Omega_aa = 0.0;      // 2 Omega
    double theta = 0.0;         // arg(K alpha*^2)
    complex alpha;              // intracavity pump amplitude on the followed branch
    bool bistable = false;      // cubic has three positive |alpha|^2 roots at the drive
    std::vector<double> branch_photon_numbers;  // all positive real |alpha|^2 roots
};

// Self-consistent Duffing operating point, following the branch continuously
// connected to the low-drive solution. When the response is bistable at the
// requested drive, all branches are reported, bistable is set, and no branch
// is auto-selected (the effective fields stay zero).
DuffingEffective duffing_effective(const JunctionParams& junction, const DuffingDrive& drive);

// Flux-pumped DC-SQUID parametric oscillator.
struct SquidParams {
    double junction_inductance = 0.0;  // L_J of the junction pair (H)
    double total_capacitance = 0.0;    // C_sigma (F)
    double flux_bias = 0.25;           // Phi_ext / Phi_0 (DC part)
    double modulation_depth = 0.0;     // epsilon
    double drive_frequency = 0.0;      // Omega (rad/s); 0 -> 2 omega_0
};

struct SquidEffective {
    double omega0 = 0.0;    // 1/sqrt(C_sigma L_J^SQUID) at the bias point
    double g_aa = 0.0;      // mu_r omega0 / 4 with mu_r = pi epsilon / 4
    double Omega_aa = 0.0;
};

SquidEffective squid_effective(const SquidParams& squid);

// Two cavity modes coupled by a junction, double-pumped (degenerate amplifier
// from two drive tones at omega_p and omega_d).
struct DoublePumpParams {
    double phi_a_zpf = 0.0;
    double phi_c_zpf = 0.0;
    double phi_q_zpf = 0.0;
    double josephson_energy = 0.0;  // E_J (J)
    double pump_strength = 0.0;     // |eps_p| (rad/s)
    double drive_strength = 0.0;    // |eps_c| (rad/s)
    double omega_a = 0.0;           // bare mode frequencies (rad/s)
    double omega_c = 0.0;
    double kappa_c = 0.0;
};

struct DoublePumpEffective {
    double chi_aa = 0.0;  // self-Kerr of mode a (rad/s)
    double chi_cc = 0.0;
    double chi_ac = 0.0;  // cross-Kerr (rad/s)
    complex xi_p;         // pump-induced displacement of mode c
    complex g2;           // chi_ac xi_p^* / 2
    double omega_p = 0.0;  // solved pump frequency (rad/s)
    double omega_d = 0.0;  // solved drive frequency (rad/s)
};

// Solves the frequency-matching conditions (vanishing rotating-frame
// detunings including AC-Stark shifts) for (omega_p, omega_d) by Newton
// iteration from the Kerr-free starting point. Throws NoMatching on failure.
DoublePumpEffective double_pump_effective(const DoublePumpParams& params);

// Josephson ring modulator pump drive.
struct JrmPump {
    double pump_amplitude = 0.0;  // |alpha_c_in| ((photons/s)^{1/2})
    double pump_phase = 0.0;
    double Omega = 0.0;    // drive frequency, also used as omega_ab^D (rad/s)
    double omega_c = 0.0;  // pump mode resonance (rad/s)
    double kappa_c = 0.0;  // pump mode linewidth (rad/s)
};

struct JrmEffective {
    double g_ab = 0.0;
    double Omega_ab = 0.0;
    double theta = 0.0;
};

JrmEffective jrm_effective(double g3, const JrmPump& pump);

}  // namespace paramp
