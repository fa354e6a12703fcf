#pragma once

#include <complex>
#include <optional>

#include "paramp/errors.hpp"

namespace paramp {

using complex = std::complex<double>;

inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double two_pi = 6.283185307179586476925286766559;

// All frequencies and rates are angular (rad/s). Configuration files quote
// linear frequencies in Hz and are converted on ingestion.
inline constexpr double hz_to_angular(double f_hz) { return two_pi * f_hz; }
inline constexpr double angular_to_hz(double w) { return w / two_pi; }

enum class Topology { Degenerate, NonDegenerate };

// One standing mode coupled to one port.
struct ModeParams {
    double omega = 0.0;  // resonance frequency (rad/s)
    double kappa = 0.0;  // energy decay rate through the port (rad/s)
    // Bath occupation hook; fixed to zero everywhere in this release.
    double bath_occupation = 0.0;

    void validate(const char* label = "mode") const;
};

// Effective amplifier model: signal (and idler) modes plus the low-Q pump
// mode, coupled by the trilinear rate g3 (non-degenerate) or g2 (degenerate).
struct AmplifierModel {
    Topology topology = Topology::NonDegenerate;
    ModeParams signal_mode;
    std::optional<ModeParams> idler_mode;  // required iff non-degenerate
    ModeParams pump_mode;
    double coupling = 0.0;  // g2 or g3 (rad/s)

    void validate() const;
    bool degenerate() const { return topology == Topology::Degenerate; }
    // kappa of the idler leg; for the degenerate case this is the signal mode.
    const ModeParams& idler_or_signal() const {
        return degenerate() ? signal_mode : *idler_mode;
    }
};

// Incident pump and coherent signal tones.
struct DriveConditions {
    double pump_flux_amplitude = 0.0;  // |<c_in>| ((photons/s)^{1/2})
    double pump_phase = 0.0;           // theta_c (rad)
    double pump_frequency = 0.0;       // Omega (rad/s)
    double signal_flux = 0.0;          // P_a,coh^in (photons/s)
    double signal_frequency = 0.0;     // omega_S (rad/s)
    double signal_phase = 0.0;         // phase of <a_in> (rad)

    void validate() const;
    // Incident pump power as a photon flux, P_c^in = |<c_in>|^2.
    double pump_flux() const { return pump_flux_amplitude * pump_flux_amplitude; }
};

// True iff the pump is tuned to omega_a + omega_b (non-degenerate) or
// 2 omega_a (degenerate) within 1e-9 relative.
bool resonant_pumping(const AmplifierModel& model, const DriveConditions& drive);

// Bare single-mode susceptibility chi_m(omega) = 1 / (1 - 2i(omega - omega_m)/kappa_m).
complex susceptibility(const ModeParams& mode, double omega);

// Effective quadratic-Hamiltonian drive obtained by integrating out the stiff
// pump: g = 2 g3 |<c_in>| / sqrt(kappa_c) (or g2 likewise), Omega and theta
// inherited from the pump tone.
struct EffectiveDrive {
    double g = 0.0;      // g_ab or g_aa (rad/s)
    double Omega = 0.0;  // Omega_ab or Omega_aa (rad/s)
    double theta = 0.0;  // drive phase (rad)
};

EffectiveDrive effective_drive(const AmplifierModel& model, const DriveConditions& drive);

// Reduced coupling rho from an effective quadratic coupling g.
double rho_ndpa_effective(double g_ab, double kappa_a, double kappa_b);
double rho_dpa_effective(double g_aa, double kappa_a);

// Undepleted reduced coupling rho^0 for the given pump amplitude:
// rho_ab^0 = 4 g3 |<c_in>| / sqrt(kappa_a kappa_b kappa_c)  (non-degenerate)
// rho_aa^0 = 8 g2 |<c_in>| / (kappa_a sqrt(kappa_c))        (degenerate)
double reduced_coupling(const AmplifierModel& model, const DriveConditions& drive);

// Pump flux amplitude |<c_in>| that produces the requested rho^0 (inverse of
// reduced_coupling).
double pump_amplitude_for_rho0(const AmplifierModel& model, double rho0);

// Zero-detuning optimal power gain G0 = ((1 + rho^2) / (1 - rho^2))^2.
// Throws StabilityViolation for rho >= 1.
double ideal_gain(double rho);

// Inverse of ideal_gain: rho = sqrt((sqrt(G0) - 1) / (sqrt(G0) + 1)).
double rho_for_gain(double gain);

// Photon flux <-> dBm at a carrier. flux = 0 maps to -infinity.
double flux_to_dbm(double flux, double carrier);
double dbm_to_flux(double dbm, double carrier);

}  // namespace paramp
