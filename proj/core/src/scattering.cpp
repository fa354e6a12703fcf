#include "paramp/scattering.hpp"

#include <cmath>

namespace paramp {

namespace {

// Fills the quartet matrix from the (r_SS, r_II, s_SI, s_IS) block. The
// second and third rows carry the conjugate coefficients relating Fourier
// components at opposite frequencies.
void fill_quartet(Eigen::Matrix4cd& m, complex r_ss, complex r_ii, complex s_si, complex s_is) {
    m.setZero();
    m(0, 0) = r_ss;
    m(0, 3) = s_si;
    m(1, 1) = std::conj(r_ss);
    m(1, 2) = std::conj(s_si);
    m(2, 1) = std::conj(s_is);
    m(2, 2) = std::conj(r_ii);
    m(3, 0) = s_is;
    m(3, 3) = r_ii;
}

}  // namespace

ScatteringBlock ndpa_scattering(const AmplifierModel& model, const EffectiveDrive& drive,
                                double omega_s) {
    const ModeParams& a = model.signal_mode;
    const ModeParams& b = model.degenerate() ? model.signal_mode : *model.idler_mode;

    const double omega_i = drive.Omega - omega_s;
    if (omega_i <= 0.0) {
        throw InvalidParameter("idler frequency Omega - omega_S must be positive");
    }
    const double rho = rho_ndpa_effective(drive.g, a.kappa, b.kappa);
    if (rho >= 1.0) {
        throw StabilityViolation("rho_ab >= 1: above the parametric oscillation threshold");
    }

    const complex chi_a_inv = 1.0 / susceptibility(a, omega_s);
    const complex chi_b_inv = 1.0 / susceptibility(b, omega_i);
    const double rho2 = rho * rho;
    const complex denom = chi_a_inv * std::conj(chi_b_inv) - rho2;
    const complex phase = std::exp(complex(0.0, -drive.theta));

    const complex r_ss = (std::conj(chi_a_inv) * std::conj(chi_b_inv) + rho2) / denom;
    const complex r_ii = (chi_a_inv * chi_b_inv + rho2) / denom;
    const complex s_si = -2.0 * rho * phase / denom;
    const complex s_is = -2.0 * rho * std::conj(phase) / denom;

    ScatteringBlock block;
    block.signal_frequency = omega_s;
    block.idler_frequency = omega_i;
    block.topology = model.topology;
    block.rho = rho;
    block.theta = drive.theta;
    fill_quartet(block.entries, r_ss, r_ii, s_si, s_is);
    return block;
}

ScatteringBlock dpa_scattering(const AmplifierModel& model, const EffectiveDrive& drive,
                               double omega_s) {
    const ModeParams& a = model.signal_mode;
    const double detuning = drive.Omega - 2.0 * a.omega;
    if (std::abs(detuning) > 1e-9 * drive.Omega) {
        throw UnsupportedDetuning("degenerate scattering implemented for Omega_aa = 2 omega_a only");
    }
    const double rho = rho_dpa_effective(drive.g, a.kappa);
    if (rho >= 1.0) {
        throw StabilityViolation("rho_aa >= 1: above the parametric oscillation threshold");
    }

    const double omega_i = 2.0 * a.omega - omega_s;
    const complex chi_inv = 1.0 / susceptibility(a, omega_s);
    const double rho2 = rho * rho;
    const complex m1 = std::norm(chi_inv) + rho2;
    const complex m2 = -2.0 * rho * std::exp(complex(0.0, -drive.theta));
    const complex d = chi_inv * chi_inv - rho2;

    ScatteringBlock block;
    block.signal_frequency = omega_s;
    block.idler_frequency = omega_i;
    block.topology = Topology::Degenerate;
    block.rho = rho;
    block.theta = drive.theta;
    fill_quartet(block.entries, m1 / d, m1 / d, m2 / d, std::conj(m2) / d);
    return block;
}

QuadratureGains quadrature_gains(const ScatteringBlock& block) {
    if (block.topology != Topology::Degenerate ||
        block.basis != ScatteringBasis::FrequencyQuartet) {
        throw InvalidParameter("quadrature gains require a tuned degenerate frequency block");
    }
    // Lambda_{par,perp} = (|chi^-1|^2 +- 2 rho + rho^2) / D. In terms of the
    // stored entries: r_SS -+ e^{i theta} s_SI.
    const complex phase = std::exp(complex(0.0, block.theta));
    QuadratureGains gains;
    gains.lambda_parallel = block.r_ss() - phase * block.s_si();
    gains.lambda_perpendicular = block.r_ss() + phase * block.s_si();
    gains.g_parallel = std::norm(gains.lambda_parallel);
    gains.g_perpendicular = std::norm(gains.lambda_perpendicular);
    return gains;
}

ScatteringBlock dpa_quadrature_block(const ScatteringBlock& block) {
    const QuadratureGains gains = quadrature_gains(block);
    ScatteringBlock quad = block;
    quad.basis = ScatteringBasis::QuadraturePair;
    quad.entries.setZero();
    quad.entries(0, 0) = gains.lambda_parallel;
    quad.entries(1, 1) = gains.lambda_perpendicular;
    return quad;
}

PhasePreservingOutput phase_preserving_output(double gain) {
    if (gain < 1.0) {
        throw InvalidParameter("phase-preserving gain must be >= 1");
    }
    PhasePreservingOutput out;
    out.signal_coeff = std::sqrt(gain);
    out.idler_conj_coeff = std::sqrt(gain - 1.0);
    out.added_noise_quanta = 0.5 * (1.0 - 1.0 / gain);
    return out;
}

}  // namespace paramp
