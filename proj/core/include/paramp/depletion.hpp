#pragma once

#include <vector>

#include "paramp/model.hpp"

namespace paramp {

// Converged mean-field operating point of the depleted amplifier.
struct DepletedOperatingPoint {
    double rho = 0.0;        // self-consistent reduced coupling
    double rho0 = 0.0;       // undepleted value
    double gain = 1.0;       // ((1+rho^2)/(1-rho^2))^2 from the stored rho
    double p_out_total = 0.0;  // photons/s
    double p_in_coh = 0.0;     // photons/s
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

enum class RhoSolverMethod { RelaxedFixedPoint, Bracketed };

struct RhoSolverOptions {
    RhoSolverMethod method = RhoSolverMethod::RelaxedFixedPoint;
    double relaxation = 0.3;   // under-relaxation factor for the fixed point map
    double tolerance = 1e-12;  // absolute tolerance on rho
    int max_iterations = 100000;
    double initial_guess = -1.0;  // < 0 means "start from rho0"
};

// Solves rho = rho0 |1 - rho0 rho/(1-rho^2)^2 P_in/P_c - v rho/(1-rho^2)|
// where v = g/(2 sqrt(kappa_c) |<c_in>|). Throws AboveThreshold for
// rho0 >= 1 and NonConvergence when the iteration budget is exhausted.
DepletedOperatingPoint solve_rho_ndpa(const AmplifierModel& model, const DriveConditions& drive,
                                      const RhoSolverOptions& options = {});
DepletedOperatingPoint solve_rho_dpa(const AmplifierModel& model, const DriveConditions& drive,
                                     const RhoSolverOptions& options = {});
// Dispatch on model.topology.
DepletedOperatingPoint solve_rho(const AmplifierModel& model, const DriveConditions& drive,
                                 const RhoSolverOptions& options = {});

// Total output photon flux on the signal port:
//   non-degenerate:  G P_in + (kappa_a/sqrt(G)) (G-1) (1+rho^2)/8
//   degenerate:      (2G-1) P_in + (kappa_a/sqrt(G)) (G-1) (1+rho^2)/8
double output_power(const AmplifierModel& model, const DepletedOperatingPoint& point);

// One row of a gain-vs-input-power sweep.
struct GainSweepPoint {
    double p_in = 0.0;  // photons/s
    DepletedOperatingPoint point;
};

// Sweeps input power upward with continuation (each solve warm-started from
// the previous solution) so the branch continuously connected to the
// undepleted limit is followed.
std::vector<GainSweepPoint> gain_sweep(const AmplifierModel& model,
                                       const DriveConditions& drive_template,
                                       const std::vector<double>& p_in_values,
                                       const RhoSolverOptions& options = {});

struct CompressionPoint {
    double p_in_1db = 0.0;      // photons/s
    double gain_at_point = 0.0;
    double reference_gain = 0.0;  // small-signal gain the drop is measured from
};

// Input power at which the gain has dropped by target_drop_db below the
// small-signal (P_in -> 0) gain. Bisection on log P_in inside
// [p_in_min, p_in_max], relative tolerance 1e-6 on P_in. Throws NotCompressed
// if the drop is not reached inside the window.
CompressionPoint compression_point(const AmplifierModel& model,
                                   const DriveConditions& drive_template,
                                   double target_drop_db, double p_in_min, double p_in_max,
                                   const RhoSolverOptions& options = {});

// Least-squares slope of gain[dB] vs input power[dBm] through a set of
// compression points, as plotted in a dynamic-range chart.
double compression_line_slope(const AmplifierModel& model,
                              const std::vector<CompressionPoint>& points);

}  // namespace paramp
