#pragma once

#include <Eigen/Dense>
#include <vector>

#include "paramp/model.hpp"

namespace paramp {

enum class Stability { Stable, Marginal, Unstable };

// Classical steady state of the coupled mode equations in the scaled
// parameterization: amplitudes are measured in units of sqrt(n_p^thr), so the
// undepleted pump amplitude modulus equals rho^0 and the oscillation
// threshold sits at |c| = 1.
struct SteadyState {
    // Mode order: signal, (idler), pump.
    std::vector<complex> amplitudes;
    Stability stability = Stability::Stable;
    std::vector<complex> jacobian_eigenvalues;  // rad/s
    double residual = 0.0;   // relative to kappa_max * (1 + |amplitudes|)
    double precision = 0.0;  // amplitude uncertainty from residual / min |eigenvalue|
};

// Drive terms of the scaled classical equations, lambda_x = -i eps_x / sqrt(n_p^thr).
struct ScaledDrive {
    complex lambda_a;
    complex lambda_b;  // zero unless the idler is driven
    complex lambda_c;
};

ScaledDrive scaled_drive(const AmplifierModel& model, const DriveConditions& drive);

// sqrt(n_p^thr): the amplitude scale relating scaled and physical mode
// amplitudes, alpha = sqrt(n_p^thr) * <a_scaled>.
double amplitude_scale(const AmplifierModel& model);

// Right-hand side of the scaled classical equations d<x>/dt = f(<x>).
// `amplitudes` and the result are ordered (a, c) or (a, b, c).
void scaled_field(const AmplifierModel& model, const ScaledDrive& drive,
                  const std::vector<complex>& amplitudes, std::vector<complex>& derivative);

// Real-form Jacobian of the scaled field at the given amplitudes, in the
// quadrature ordering (Re a, [Re b,] Re c, Im a, [Im b,] Im c).
Eigen::MatrixXd scaled_jacobian(const AmplifierModel& model,
                                const std::vector<complex>& amplitudes);

struct SteadyStateOptions {
    int multistart_points = 32;
    int refined_points = 128;
    int max_refinements = 2;       // extra x4 refinement rounds on disagreement
    double start_amplitude = 3.0;  // lattice radius in units of sqrt(n_p^thr)
    double dedup_tolerance = 1e-8;
    double residual_tolerance = 1e-10;
    double marginal_tolerance = 1e-8;  // |Re eig| below this * kappa_max -> marginal
    int newton_max_iterations = 200;
    uint64_t seed = 0x5eedu;
};

// All steady states found by multi-start damped Newton, deduplicated and
// classified by the Jacobian spectrum. Throws SolverExhausted when root
// counts keep disagreeing across refinement levels.
std::vector<SteadyState> steady_states(const AmplifierModel& model, const DriveConditions& drive,
                                       const SteadyStateOptions& options = {});
std::vector<SteadyState> steady_states(const AmplifierModel& model, const ScaledDrive& drive,
                                       const SteadyStateOptions& options = {});

enum class ThresholdStatus { Found, NoThreshold, Inconclusive };

struct ThresholdResult {
    ThresholdStatus status = ThresholdStatus::Inconclusive;
    double pump_flux_threshold = 0.0;  // photons/s (P_c^in)
    double pump_flux_below = 0.0;      // largest probed pump flux with a unique state
    double pump_flux_cap = 0.0;
    SteadyState state_below;  // amplifier state just below threshold
};

struct ThresholdOptions {
    double relative_tolerance = 1e-4;
    double cap_db_above_zero_signal = 40.0;
    SteadyStateOptions steady_options;
};

// Smallest pump power (photons/s) at which multiple non-decaying steady
// states appear, for the given incident signal flux. NoThreshold when
// multiplicity never occurs up to the cap.
ThresholdResult oscillation_threshold(const AmplifierModel& model, double signal_flux,
                                      const ThresholdOptions& options = {});

// Total signal-port output flux at the pump power one bisection step below
// the oscillation threshold. Propagates the NoThreshold condition by throwing
// InvalidParameter when the threshold does not exist.
double max_output_before_oscillation(const AmplifierModel& model, double signal_flux,
                                     const ThresholdOptions& options = {});

// Analytic zero-signal threshold pump flux, |<c_in>|^2 at rho^0 = 1.
double zero_signal_threshold_flux(const AmplifierModel& model);

}  // namespace paramp
