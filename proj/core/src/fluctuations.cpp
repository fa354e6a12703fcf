#include "paramp/fluctuations.hpp"

#include <cmath>

namespace paramp {

double np_threshold_photons(const AmplifierModel& model) {
    const double ka = model.signal_mode.kappa;
    const double g = model.coupling;
    if (model.degenerate()) {
        return ka * ka / (16.0 * g * g);
    }
    const double kb = model.idler_mode->kappa;
    return ka * kb / (4.0 * g * g);
}

Eigen::MatrixXd FluctuationState::lab_covariance() const {
    const int m = n_modes;
    Eigen::MatrixXd rot = Eigen::MatrixXd::Zero(dim(), dim());
    for (int i = 0; i < m; ++i) {
        const double c = std::cos(rotation_phases[i]);
        const double s = std::sin(rotation_phases[i]);
        rot(i, i) = c;
        rot(i, i + m) = -s;
        rot(i + m, i) = s;
        rot(i + m, i + m) = c;
    }
    // covariance is expressed in rotated coordinates v' = rot * v_lab.
    return rot.transpose() * covariance * rot;
}

Eigen::VectorXd FluctuationState::lab_means(const AmplifierModel& model,
                                            const SteadyState& steady) const {
    const double scale = amplitude_scale(model);
    const int m = n_modes;
    Eigen::VectorXd means(dim());
    for (int i = 0; i < m; ++i) {
        means(i) = scale * steady.amplitudes[i].real();
        means(i + m) = scale * steady.amplitudes[i].imag();
    }
    return means;
}

FluctuationState assemble_fokker_planck(const AmplifierModel& model, const SteadyState& steady) {
    if (steady.stability == Stability::Unstable) {
        throw InvalidParameter("fluctuation analysis requires a stable or marginal steady state");
    }
    const int m = model.degenerate() ? 2 : 3;
    if (static_cast<int>(steady.amplitudes.size()) != m) {
        throw InvalidParameter("steady state does not match the model topology");
    }

    // Rotate amplitudes onto the real axis. The mode rotations are not
    // independent: the coupling fixes phi_c = 2 phi_a (degenerate) and
    // phi_c = phi_a + phi_b (non-degenerate), so realizability of all
    // amplitudes simultaneously is a property of the drive phases.
    std::vector<double> phases(m, 0.0);
    const complex a = steady.amplitudes[0];
    const complex c = steady.amplitudes[m - 1];
    const double tol = 1e-9 * (1.0 + std::abs(c));
    auto real_after = [&](const complex& z, double phi) {
        return std::abs(std::sin(std::arg(z) + phi)) * std::abs(z);
    };
    if (model.degenerate()) {
        double phi_a = std::abs(a) > 0.0 ? -std::arg(a) : 0.0;
        if (std::abs(a) == 0.0) {
            phi_a = std::abs(c) > 0.0 ? -0.5 * std::arg(c) : 0.0;
        }
        phases = {phi_a, 2.0 * phi_a};
        // pi ambiguity of phi_a leaves c's rotation unchanged; no freedom left.
        if (real_after(a, phases[0]) > tol || real_after(c, phases[1]) > tol) {
            throw PhaseConventionUnavailable(
                "steady amplitudes cannot be simultaneously rotated real");
        }
    } else {
        const complex b = steady.amplitudes[1];
        double phi_a = std::abs(a) > 0.0 ? -std::arg(a) : 0.0;
        double phi_b = std::abs(b) > 0.0 ? -std::arg(b) : 0.0;
        if (std::abs(a) == 0.0 && std::abs(b) == 0.0) {
            phi_a = std::abs(c) > 0.0 ? -0.5 * std::arg(c) : 0.0;
            phi_b = phi_a;
        } else if (std::abs(a) == 0.0) {
            phi_a = std::abs(c) > 0.0 ? -std::arg(c) - phi_b : 0.0;
        } else if (std::abs(b) == 0.0) {
            phi_b = std::abs(c) > 0.0 ? -std::arg(c) - phi_a : 0.0;
        }
        phases = {phi_a, phi_b, phi_a + phi_b};
        if (real_after(a, phases[0]) > tol || real_after(b, phases[1]) > tol ||
            real_after(c, phases[2]) > tol) {
            throw PhaseConventionUnavailable(
                "steady amplitudes cannot be simultaneously rotated real");
        }
    }

    std::vector<double> amp(m);
    for (int i = 0; i < m; ++i) {
        amp[i] = (steady.amplitudes[i] * std::exp(complex(0.0, phases[i]))).real();
    }

    FluctuationState state;
    state.n_modes = m;
    state.rotation_phases = phases;
    state.real_amplitudes = amp;
    const int n = 2 * m;
    state.drift = Eigen::MatrixXd::Zero(n, n);
    state.diffusion = Eigen::VectorXd::Zero(n);

    const double ka = model.signal_mode.kappa;
    const double kc = model.pump_mode.kappa;
    if (model.degenerate()) {
        const double a0 = amp[0], c0 = amp[1];
        // Quadrature blocks (z_j, u_j), j = 1 (real parts), j = 2 (imaginary
        // parts); the j-th block carries the squeezing factor 1 -+ (-1)^j c0.
        for (int j = 0; j < 2; ++j) {
            const double sign = (j == 0) ? 1.0 : -1.0;
            // offsets in the (Re a, Re c, Im a, Im c) layout
            const int zi = j * m + 0, ui = j * m + 1;
            state.drift(zi, zi) = 0.5 * ka * (1.0 + sign * c0);
            state.drift(zi, ui) = 0.5 * ka * a0;
            state.drift(ui, zi) = -0.5 * ka * a0;
            state.drift(ui, ui) = 0.5 * kc;
            state.diffusion(zi) = ka / 8.0;
            state.diffusion(ui) = kc / 8.0;
        }
    } else {
        const double kb = model.idler_mode->kappa;
        const double sigma = 0.5 * std::sqrt(ka * kb);
        const double a0 = amp[0], b0 = amp[1], c0 = amp[2];
        for (int j = 0; j < 2; ++j) {
            const double sign = (j == 0) ? 1.0 : -1.0;
            const int zi = j * m + 0, wi = j * m + 1, ui = j * m + 2;
            state.drift(zi, zi) = 0.5 * ka;
            state.drift(zi, wi) = sign * sigma * c0;
            state.drift(zi, ui) = sigma * b0;
            state.drift(wi, zi) = sign * sigma * c0;
            state.drift(wi, wi) = 0.5 * kb;
            state.drift(wi, ui) = sigma * a0;
            state.drift(ui, zi) = -sigma * b0;
            state.drift(ui, wi) = -sigma * a0;
            state.drift(ui, ui) = 0.5 * kc;
            state.diffusion(zi) = ka / 8.0;
            state.diffusion(wi) = kb / 8.0;
            state.diffusion(ui) = kc / 8.0;
        }
    }
    return state;
}

Eigen::MatrixXd steady_covariance(FluctuationState& state) {
    const int n = state.dim();
    const Eigen::MatrixXd& a = state.drift;

    Eigen::EigenSolver<Eigen::MatrixXd> eigs(a);
    double kappa_scale = 0.0;
    for (int i = 0; i < n; ++i) kappa_scale = std::max(kappa_scale, std::abs(a(i, i)));
    for (int i = 0; i < n; ++i) {
        if (eigs.eigenvalues()(i).real() <= 1e-12 * kappa_scale) {
            throw MarginallyStable(
                "drift spectrum touches zero: solve the distribution stochastically instead");
        }
    }

    // Vectorized dense solve of A S + S A^T = 2 diag(d); n <= 6.
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(n * n, n * n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int row = i * n + j;
            for (int k = 0; k < n; ++k) {
                lhs(row, k * n + j) += a(i, k);  // (A S)_{ij}
                lhs(row, i * n + k) += a(j, k);  // (S A^T)_{ij}
            }
            if (i == j) rhs(row) = 2.0 * state.diffusion(i);
        }
    }
    const Eigen::VectorXd vec = lhs.fullPivLu().solve(rhs);
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) cov(i, j) = vec(i * n + j);
    }
    cov = 0.5 * (cov + cov.transpose()).eval();

    const double residual = (a * cov + cov * a.transpose() -
                             2.0 * Eigen::MatrixXd(state.diffusion.asDiagonal())).norm();
    if (residual > 1e-10 * (1.0 + cov.norm()) * kappa_scale) {
        throw NonConvergence("Lyapunov residual too large", {residual});
    }
    state.covariance = cov;
    return cov;
}

GridSpec auto_grid(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& means,
                   int coord_x, int coord_y, int nx, int ny) {
    GridSpec grid;
    const double sx = std::sqrt(covariance(coord_x, coord_x));
    const double sy = std::sqrt(covariance(coord_y, coord_y));
    grid.x_min = means(coord_x) - 6.0 * sx;
    grid.x_max = means(coord_x) + 6.0 * sx;
    grid.y_min = means(coord_y) - 6.0 * sy;
    grid.y_max = means(coord_y) + 6.0 * sy;
    grid.nx = nx;
    grid.ny = ny;
    return grid;
}

WignerField gaussian_wigner_grid(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& means,
                                 int coord_x, int coord_y, const GridSpec& grid) {
    if (grid.nx < 2 || grid.ny < 2) {
        throw InvalidParameter("grid needs at least 2 points per axis");
    }
    Eigen::Matrix2d sub;
    sub << covariance(coord_x, coord_x), covariance(coord_x, coord_y),
           covariance(coord_y, coord_x), covariance(coord_y, coord_y);
    const double det = sub.determinant();
    if (det <= 0.0) {
        throw InvalidParameter("marginal covariance is not positive definite");
    }
    const Eigen::Matrix2d inv = sub.inverse();
    const double norm = 1.0 / (two_pi * std::sqrt(det));

    WignerField field;
    field.grid = grid;
    field.values.resize(static_cast<size_t>(grid.nx) * grid.ny);
    const double dx = (grid.x_max - grid.x_min) / (grid.nx - 1);
    const double dy = (grid.y_max - grid.y_min) / (grid.ny - 1);
    double mass = 0.0;
    for (int iy = 0; iy < grid.ny; ++iy) {
        const double y = grid.y_min + iy * dy - means(coord_y);
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double x = grid.x_min + ix * dx - means(coord_x);
            const double q = inv(0, 0) * x * x + 2.0 * inv(0, 1) * x * y + inv(1, 1) * y * y;
            const double value = norm * std::exp(-0.5 * q);
            field.values[static_cast<size_t>(iy) * grid.nx + ix] = value;
            mass += value;
        }
    }
    field.mass = mass * dx * dy;
    if (field.mass < 0.999) {
        throw GridTooNarrow("grid captures less than 99.9% of the probability mass");
    }
    return field;
}

}  // namespace paramp
