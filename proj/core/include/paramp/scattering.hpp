#pragma once

#include <Eigen/Dense>

#include "paramp/model.hpp"

namespace paramp {

enum class ScatteringBasis { FrequencyQuartet, QuadraturePair };

// Frequency-domain scattering of the linear (stiff pump) amplifier. In the
// FrequencyQuartet basis the rows/columns are ordered
//   (a[+omega_S], a[-omega_S], b[+omega_I], b[-omega_I])
// for the non-degenerate amplifier, with b -> a for the degenerate one.
// Rows at negative frequency are element-wise conjugates of the positive
// frequency rows.
struct ScatteringBlock {
    Eigen::Matrix4cd entries = Eigen::Matrix4cd::Zero();
    double signal_frequency = 0.0;  // omega_S (rad/s)
    double idler_frequency = 0.0;   // omega_I = Omega - omega_S (rad/s)
    ScatteringBasis basis = ScatteringBasis::FrequencyQuartet;
    Topology topology = Topology::NonDegenerate;
    double rho = 0.0;    // reduced coupling used to build the block
    double theta = 0.0;  // pump phase

    complex r_ss() const { return entries(0, 0); }
    complex s_si() const { return entries(0, 3); }
    complex s_is() const { return entries(3, 0); }
    complex r_ii() const { return entries(3, 3); }
};

// Non-degenerate scattering matrix. Preconditions: omega_I = Omega - omega_S > 0
// and rho_ab < 1 (throws StabilityViolation otherwise).
ScatteringBlock ndpa_scattering(const AmplifierModel& model, const EffectiveDrive& drive,
                                double omega_s);

// Degenerate scattering matrix for the precisely tuned pump Omega_aa = 2 omega_a.
// Throws UnsupportedDetuning for a detuned pump and StabilityViolation for
// rho_aa >= 1.
ScatteringBlock dpa_scattering(const AmplifierModel& model, const EffectiveDrive& drive,
                               double omega_s);

// Amplified / deamplified quadrature power gains of the tuned degenerate
// amplifier. G_par * G_perp = 1.
struct QuadratureGains {
    double g_parallel = 0.0;
    double g_perpendicular = 0.0;
    complex lambda_parallel;
    complex lambda_perpendicular;
};

QuadratureGains quadrature_gains(const ScatteringBlock& block);

// Diagonal 2x2 quadrature-basis block (Lambda_par, Lambda_perp) of a tuned
// degenerate amplifier.
ScatteringBlock dpa_quadrature_block(const ScatteringBlock& block);

// Phase-preserving reflection amplifier abstraction a_out = sqrt(G) a_in
// + sqrt(G-1) b_in^dag, with the idler port terminated in vacuum.
struct PhasePreservingOutput {
    double signal_coeff = 1.0;      // sqrt(G)
    double idler_conj_coeff = 0.0;  // sqrt(G-1)
    double added_noise_quanta = 0.0;  // (1 - 1/G) / 2, input referred
};

PhasePreservingOutput phase_preserving_output(double gain);

}  // namespace paramp
