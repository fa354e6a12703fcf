#include "paramp/circuits.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace paramp {

namespace {

// Positive real roots of the cubic c3 n^3 + c2 n^2 + c1 n + c0 = 0 via the
// companion matrix.
std::vector<double> positive_real_roots(double c3, double c2, double c1, double c0) {
    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(0, 2) = -c0 / c3;
    companion(1, 2) = -c1 / c3;
    companion(2, 2) = -c2 / c3;
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    const Eigen::Vector3cd roots = companion.eigenvalues();
    std::vector<double> out;
    for (int i = 0; i < 3; ++i) {
        const complex r = roots(i);
        if (std::abs(r.imag()) < 1e-9 * (1.0 + std::abs(r.real())) && r.real() > 0.0) {
            out.push_back(r.real());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

double JunctionParams::junction_inductance() const {
    const double phi0_red = hbar / (2.0 * electron_charge);  // hbar/2e
    return phi0_red * phi0_red / josephson_energy;
}

double JunctionParams::phi_zpf() const {
    const double lj = junction_inductance();
    return std::sqrt(2.0 * electron_charge * electron_charge / hbar) *
           std::pow(lj / total_capacitance, 0.25);
}

void JunctionParams::validate() const {
    if (!(josephson_energy > 0.0) || !(total_capacitance > 0.0)) {
        throw InvalidParameter("junction needs E_J > 0 and C_sigma > 0");
    }
    const double phi = phi_zpf();
    if (phi >= 0.5) {
        throw InvalidParameter("phi_zpf >= 0.5: the quartic expansion of cos(phi) is invalid");
    }
    if (phi > 0.3) {
        std::ostringstream os;
        os << "phi_zpf = " << phi << " > 0.3; quartic truncation error is appreciable";
        emit_warning(os.str());
    }
}

DuffingEffective duffing_effective(const JunctionParams& junction, const DuffingDrive& drive) {
    junction.validate();
    if (!(drive.kappa_a > 0.0)) {
        throw InvalidParameter("kappa_a must be > 0");
    }
    DuffingEffective eff;
    eff.kerr = -electron_charge * electron_charge / (2.0 * hbar * junction.total_capacitance);
    eff.omega_bare = 1.0 / std::sqrt(junction.junction_inductance() * junction.total_capacitance) +
                     eff.kerr;
    eff.Omega_aa = 2.0 * drive.Omega;

    const double kappa = drive.kappa_a;
    const double delta = drive.Omega - eff.omega_bare;
    const double k = eff.kerr;
    const double target_power = drive.pump_amplitude * drive.pump_amplitude;

    if (target_power == 0.0) {
        eff.omega_a_eff = eff.omega_bare;
        return eff;
    }

    // |alpha|^2 [(delta - K |alpha|^2)^2 + kappa^2/4] = kappa |alpha_in|^2,
    // followed by continuation from low drive.
    auto roots_at = [&](double power) {
        return positive_real_roots(k * k, -2.0 * delta * k, delta * delta + 0.25 * kappa * kappa,
                                   -kappa * power);
    };

    const int n_steps = 64;
    double n_prev = 0.0;
    for (int i = 1; i <= n_steps; ++i) {
        const double power = target_power * i / n_steps;
        const std::vector<double> roots = roots_at(power);
        if (roots.empty()) {
            throw NonConvergence("duffing cubic lost all positive roots along the sweep", {});
        }
        double best = roots.front();
        for (double r : roots) {
            if (std::abs(r - n_prev) < std::abs(best - n_prev)) best = r;
        }
        n_prev = best;
        if (i == n_steps) {
            eff.branch_photon_numbers = roots;
            if (roots.size() == 3) {
                eff.bistable = true;
                return eff;  // all branches reported, none auto-selected
            }
        }
    }

    const double n_photons = n_prev;
    const complex alpha_in = drive.pump_amplitude * std::exp(complex(0.0, drive.pump_phase));
    eff.alpha = complex(0.0, 1.0) * std::sqrt(kappa) * alpha_in /
                complex(delta - k * n_photons, 0.5 * kappa);
    eff.omega_a_eff = eff.omega_bare + 2.0 * k * n_photons;
    const complex g_phase = 0.5 * k * std::conj(eff.alpha) * std::conj(eff.alpha);
    eff.g_aa = std::abs(g_phase);
    eff.theta = std::arg(g_phase);
    return eff;
}

SquidEffective squid_effective(const SquidParams& squid) {
    if (!(squid.junction_inductance > 0.0) || !(squid.total_capacitance > 0.0)) {
        throw InvalidParameter("SQUID needs L_J > 0 and C_sigma > 0");
    }
    if (squid.modulation_depth < 0.0) {
        throw InvalidParameter("modulation depth must be >= 0");
    }
    if (squid.modulation_depth > 0.2) {
        std::ostringstream os;
        os << "flux modulation depth epsilon = " << squid.modulation_depth
           << " > 0.2; the linear-in-epsilon inductance modulation is marginal";
        emit_warning(os.str());
    }
    const double cosine = std::cos(two_pi / 2.0 * squid.flux_bias);
    if (std::abs(cosine) < 0.05) {
        throw FluxNearHalfQuantum("flux bias too close to half a flux quantum");
    }
    SquidEffective eff;
    const double l_squid = squid.junction_inductance / std::abs(cosine);
    eff.omega0 = 1.0 / std::sqrt(squid.total_capacitance * l_squid);
    const double mu_r = two_pi / 8.0 * squid.modulation_depth;  // pi epsilon / 4
    eff.g_aa = mu_r * eff.omega0 / 4.0;
    eff.Omega_aa = squid.drive_frequency > 0.0 ? squid.drive_frequency : 2.0 * eff.omega0;
    return eff;
}

DoublePumpEffective double_pump_effective(const DoublePumpParams& p) {
    for (double phi : {p.phi_a_zpf, p.phi_c_zpf, p.phi_q_zpf}) {
        if (phi < 0.0 || phi >= 0.5) {
            throw InvalidParameter("zero-point phases must lie in [0, 0.5)");
        }
    }
    if (!(p.josephson_energy > 0.0) || !(p.kappa_c > 0.0)) {
        throw InvalidParameter("need E_J > 0 and kappa_c > 0");
    }
    DoublePumpEffective eff;
    const double ej = p.josephson_energy;
    eff.chi_aa = ej * std::pow(p.phi_a_zpf, 4) / (2.0 * hbar);
    eff.chi_cc = ej * std::pow(p.phi_c_zpf, 4) / (2.0 * hbar);
    eff.chi_ac = ej * p.phi_a_zpf * p.phi_a_zpf * p.phi_c_zpf * p.phi_c_zpf / hbar;

    auto xi_p_at = [&](double omega_p) {
        return -complex(0.0, 1.0) * p.pump_strength /
               complex(0.5 * p.kappa_c, p.omega_c - omega_p);
    };
    // Detuning residuals in the doubly rotating frame, including the
    // AC-Stark shifts from the pump-populated c mode.
    auto residuals = [&](double omega_p, double omega_d) {
        const double xi2 = std::norm(xi_p_at(omega_p));
        Eigen::Vector2d f;
        f(0) = p.omega_a - 0.5 * (omega_d + omega_p) - eff.chi_aa - eff.chi_ac * xi2;
        f(1) = p.omega_c - omega_d - eff.chi_cc - eff.chi_cc * xi2;
        return f;
    };

    // Kerr-free starting point: omega_d = omega_c, omega_p = 2 omega_a - omega_d.
    double omega_d = p.omega_c;
    double omega_p = 2.0 * p.omega_a - omega_d;
    const double scale = std::max(std::abs(p.omega_a), std::abs(p.omega_c));
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        const Eigen::Vector2d f = residuals(omega_p, omega_d);
        if (f.norm() < 1e-9 * scale) {
            converged = true;
            break;
        }
        const double h = 1e-6 * scale;
        Eigen::Matrix2d jac;
        jac.col(0) = (residuals(omega_p + h, omega_d) - f) / h;
        jac.col(1) = (residuals(omega_p, omega_d + h) - f) / h;
        const Eigen::Vector2d step = jac.fullPivLu().solve(-f);
        if (!step.allFinite()) break;
        omega_p += step(0);
        omega_d += step(1);
    }
    if (!converged) {
        throw NoMatching("frequency-matching Newton iteration failed");
    }
    eff.omega_p = omega_p;
    eff.omega_d = omega_d;
    eff.xi_p = xi_p_at(omega_p);
    eff.g2 = 0.5 * eff.chi_ac * std::conj(eff.xi_p);
    return eff;
}

JrmEffective jrm_effective(double g3, const JrmPump& pump) {
    if (!(g3 > 0.0)) {
        throw InvalidParameter("g3 must be > 0");
    }
    if (!(pump.kappa_c > 0.0)) {
        throw InvalidParameter("kappa_c must be > 0");
    }
    if (g3 > pump.kappa_c / 10.0) {
        emit_warning("g3 is not small against kappa_c; the stiff-pump hierarchy is weak");
    }
    const complex alpha_in = pump.pump_amplitude * std::exp(complex(0.0, pump.pump_phase));
    const complex response = std::sqrt(pump.kappa_c) * alpha_in /
                             complex(pump.kappa_c, -(pump.Omega - pump.omega_c));
    JrmEffective eff;
    eff.g_ab = g3 * std::abs(response);
    eff.theta = -std::arg(response);
    eff.Omega_ab = pump.Omega;
    return eff;
}

}  // namespace paramp
