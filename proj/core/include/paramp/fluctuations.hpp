#pragma once

#include <Eigen/Dense>
#include <vector>

#include "paramp/model.hpp"
#include "paramp/semiclassical.hpp"

namespace paramp {

// Intracavity pump photon number at the oscillation threshold:
// kappa_a^2/(16 g2^2) (degenerate), kappa_a kappa_b/(4 g3^2) (non-degenerate).
double np_threshold_photons(const AmplifierModel& model);

// Linearized drift-diffusion description of the quadrature fluctuations
// around a classical steady state. Quadratures are ordered
// (Re a, [Re b,] Re c, Im a, [Im b,] Im c) in the rotated frame where the
// steady amplitudes are real; `rotation_phases` maps back to the lab frame.
struct FluctuationState {
    Eigen::MatrixXd drift;      // N x N, positive-stable at a stable point
    Eigen::VectorXd diffusion;  // per-coordinate diffusion constants (kappa/8)
    Eigen::MatrixXd covariance; // filled by steady_covariance
    std::vector<double> rotation_phases;  // per-mode phase applied to make amplitudes real
    std::vector<double> real_amplitudes;  // rotated steady amplitudes (scaled units)
    int n_modes = 0;

    int dim() const { return 2 * n_modes; }
    // Covariance rotated back to the lab quadratures.
    Eigen::MatrixXd lab_covariance() const;
    // Unscaled lab-frame quadrature means, sqrt(n_p^thr) * steady amplitudes.
    Eigen::VectorXd lab_means(const AmplifierModel& model, const SteadyState& steady) const;
};

// Builds drift and diffusion of the factorized quadrature Fokker-Planck
// equations around `steady`. Throws PhaseConventionUnavailable when the
// amplitudes cannot be rotated real.
FluctuationState assemble_fokker_planck(const AmplifierModel& model, const SteadyState& steady);

// Solves drift * S + S * drift^T = 2 diag(diffusion) for the steady-state
// covariance (stored in `state` and returned). Throws MarginallyStable when
// a drift eigenvalue has a non-positive real part.
Eigen::MatrixXd steady_covariance(FluctuationState& state);

// Rectangular sampling grid for a two-coordinate Wigner marginal.
struct GridSpec {
    double x_min = 0.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;
    int nx = 0, ny = 0;
};

// Grid sized at means +- 6 sigma, which captures unit mass to ~1e-9.
GridSpec auto_grid(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& means,
                   int coord_x, int coord_y, int nx = 128, int ny = 128);

struct WignerField {
    GridSpec grid;
    std::vector<double> values;  // row-major, values[iy * nx + ix]
    double mass = 0.0;           // Riemann sum * cell area
};

// Two-coordinate Gaussian marginal of the Wigner distribution evaluated on
// the grid. Throws GridTooNarrow when the captured mass is below 0.999.
WignerField gaussian_wigner_grid(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& means,
                                 int coord_x, int coord_y, const GridSpec& grid);

}  // namespace paramp
