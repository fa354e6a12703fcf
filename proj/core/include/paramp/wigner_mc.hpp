#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "paramp/model.hpp"

namespace paramp {

enum class SdeIntegrator {
    EulerMaruyama,  // weak order 1
    Heun,           // drift midpoint; removes the O(rate*dt) variance bias
};

struct EnsembleConfig {
    int n_trajectories = 10000;
    double dt = 0.0;          // 0 -> dt_factor / (fastest rate)
    double dt_factor = 0.005;
    SdeIntegrator integrator = SdeIntegrator::EulerMaruyama;
    double burn_in = 0.0;     // seconds
    double t_final = 0.0;     // seconds; must exceed burn_in
    int n_samples = 1;        // per-trajectory samples, evenly spaced in (burn_in, t_final]
    std::uint64_t master_seed = 0x9e3779b97f4a7c15ull;
    int n_threads = 0;        // 0 -> hardware concurrency
    double amplitude_guard = 1e6;
    // Initial ensemble means (one per mode). Empty means the origin; vacuum
    // fluctuations are sampled around the means either way, i.e. the ensemble
    // starts in a coherent state.
    std::vector<complex> initial_means;
};

// Ensemble of truncated-Wigner trajectories. Per-trajectory noise streams are
// derived deterministically from (master_seed, trajectory index), so results
// are bit-identical for any worker count and execution order.
struct TrajectoryEnsemble {
    int n_modes = 0;
    int n_traj = 0;
    int n_samples = 0;
    double dt = 0.0;
    double burn_in = 0.0;
    double t_final = 0.0;
    std::uint64_t master_seed = 0;
    // samples[(traj * n_samples + sample) * n_modes + mode]
    std::vector<complex> samples;

    complex at(int traj, int sample, int mode) const {
        return samples[(static_cast<size_t>(traj) * n_samples + sample) * n_modes + mode];
    }
};

// Integrates the rotating-frame truncated-Wigner Langevin equations with
// Euler-Maruyama steps and vacuum initial conditions (variance 1/4 per
// quadrature). Requires resonant pumping. Throws StepInstability when a
// trajectory exceeds the amplitude guard.
TrajectoryEnsemble simulate(const AmplifierModel& model, const DriveConditions& drive,
                            const EnsembleConfig& config);

// Sample covariance of the 2M quadratures (Re modes..., Im modes...) over all
// trajectories and post-burn-in samples, with batch-means standard errors
// across trajectories. Throws InsufficientSamples below 100 effective samples.
struct SampleCovariance {
    Eigen::VectorXd mean;
    Eigen::VectorXd mean_se;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd covariance_se;
    long n_effective = 0;
};

SampleCovariance sample_covariance(const TrajectoryEnsemble& ensemble);

// Normally ordered output photon flux on the signal port,
//   P_out = |<a_out>|^2 + kappa_a (Var[alpha] - 1/2),
// with <a_out> = -<a_in> + sqrt(kappa_a) <alpha>. The -1/2 removes the
// symmetric-ordering vacuum contribution of the Wigner moments.
struct FluxEstimate {
    double flux = 0.0;       // photons/s
    double std_error = 0.0;  // propagated from the moment errors
};

FluxEstimate output_flux_estimate(const TrajectoryEnsemble& ensemble,
                                  const AmplifierModel& model, const DriveConditions& drive);

// Excess kurtosis <q^4>/<q^2>^2 - 3 of one quadrature (0 = Re, 1 = Im) of a
// mode, centered on the ensemble mean.
double excess_kurtosis(const TrajectoryEnsemble& ensemble, int mode, int quadrature);

// Ensemble phase spread of a mode: circular variance of arg(alpha) over all
// samples, in [0, 1]. Phase diffusion drives it toward 1.
double phase_spread(const TrajectoryEnsemble& ensemble, int mode);

struct Histogram2D {
    int nx = 0, ny = 0;
    double x_min = 0.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;
    std::vector<double> counts;  // row-major, counts[iy * nx + ix]
};

// 2D histogram of (Re, Im) of a mode over all post-burn-in samples. When
// x_min == x_max the range is sized from the sample extrema.
Histogram2D histogram2d(const TrajectoryEnsemble& ensemble, int mode, int nx, int ny,
                        double x_min = 0.0, double x_max = 0.0, double y_min = 0.0,
                        double y_max = 0.0);

// Plain-text matrix with '# axis' header lines giving ranges and bin counts.
std::string histogram_to_text(const Histogram2D& histogram);

}  // namespace paramp
