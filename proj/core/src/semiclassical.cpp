#include "paramp/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "paramp/depletion.hpp"
#include "paramp/fluctuations.hpp"

namespace paramp {

namespace {

int mode_count(const AmplifierModel& model) { return model.degenerate() ? 2 : 3; }

double kappa_max(const AmplifierModel& model) {
    double k = std::max(model.signal_mode.kappa, model.pump_mode.kappa);
    if (model.idler_mode) k = std::max(k, model.idler_mode->kappa);
    return k;
}

Eigen::VectorXd to_real(const std::vector<complex>& z) {
    const int m = static_cast<int>(z.size());
    Eigen::VectorXd x(2 * m);
    for (int i = 0; i < m; ++i) {
        x(i) = z[i].real();
        x(m + i) = z[i].imag();
    }
    return x;
}

std::vector<complex> to_complex(const Eigen::VectorXd& x) {
    const int m = static_cast<int>(x.size()) / 2;
    std::vector<complex> z(m);
    for (int i = 0; i < m; ++i) z[i] = complex(x(i), x(m + i));
    return z;
}

double relative_residual(const AmplifierModel& model, const Eigen::VectorXd& f,
                         const Eigen::VectorXd& x) {
    return f.norm() / (kappa_max(model) * (1.0 + x.norm()));
}

struct NewtonResult {
    Eigen::VectorXd x;
    bool converged = false;
};

NewtonResult damped_newton(const AmplifierModel& model, const ScaledDrive& drive,
                           Eigen::VectorXd x, const SteadyStateOptions& opt) {
    const int m = mode_count(model);
    Eigen::VectorXd fv(2 * m);

    auto eval = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        std::vector<complex> zz = to_complex(v);
        std::vector<complex> ff(m);
        scaled_field(model, drive, zz, ff);
        return to_real(ff);
    };

    // Polish with undamped steps so that every start converging to the same
    // root lands within the dedup tolerance. At a bifurcation the root is
    // degenerate and Newton contracts only linearly, hence the generous
    // iteration budget.
    auto polish = [&](Eigen::VectorXd v, Eigen::VectorXd f) -> NewtonResult {
        for (int it = 0; it < 48; ++it) {
            const Eigen::MatrixXd jac = scaled_jacobian(model, to_complex(v));
            const Eigen::VectorXd step = jac.fullPivLu().solve(-f);
            if (!step.allFinite()) break;
            const Eigen::VectorXd v_try = v + step;
            const Eigen::VectorXd f_try = eval(v_try);
            if (f_try.norm() >= f.norm()) break;
            v = v_try;
            f = f_try;
        }
        return {v, relative_residual(model, f, v) < opt.residual_tolerance};
    };

    fv = eval(x);
    for (int it = 0; it < opt.newton_max_iterations; ++it) {
        if (relative_residual(model, fv, x) < opt.residual_tolerance) {
            return polish(x, fv);
        }
        const Eigen::MatrixXd jac = scaled_jacobian(model, to_complex(x));
        const Eigen::VectorXd step = jac.fullPivLu().solve(-fv);
        if (!step.allFinite()) break;
        double lambda = 1.0;
        const double f0 = fv.squaredNorm();
        bool accepted = false;
        for (int back = 0; back < 40; ++back) {
            const Eigen::VectorXd x_try = x + lambda * step;
            const Eigen::VectorXd f_try = eval(x_try);
            if (f_try.squaredNorm() < f0 || f_try.norm() < 1e-300) {
                x = x_try;
                fv = f_try;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    if (relative_residual(model, fv, x) < opt.residual_tolerance) {
        return polish(x, fv);
    }
    return {x, false};
}

Stability classify(const AmplifierModel& model, const std::vector<complex>& amplitudes,
                   std::vector<complex>& eigenvalues, double marginal_tolerance) {
    const Eigen::MatrixXd jac = scaled_jacobian(model, amplitudes);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(jac);
    const double tol = marginal_tolerance * kappa_max(model);
    eigenvalues.clear();
    bool any_positive = false;
    bool any_marginal = false;
    for (int i = 0; i < jac.rows(); ++i) {
        const complex ev(solver.eigenvalues()(i).real(), solver.eigenvalues()(i).imag());
        eigenvalues.push_back(ev);
        if (ev.real() > tol) any_positive = true;
        else if (ev.real() > -tol) any_marginal = true;
    }
    if (any_positive) return Stability::Unstable;
    if (any_marginal) return Stability::Marginal;
    return Stability::Stable;
}

std::vector<SteadyState> run_multistart(const AmplifierModel& model, const ScaledDrive& drive,
                                        int n_starts, const SteadyStateOptions& opt) {
    const int m = mode_count(model);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(-opt.start_amplitude, opt.start_amplitude);

    std::vector<Eigen::VectorXd> starts;
    starts.reserve(n_starts + 4);
    // Canonical starts: origin and the undepleted pump point, plus the pump
    // point kicked along both signal quadratures.
    Eigen::VectorXd origin = Eigen::VectorXd::Zero(2 * m);
    starts.push_back(origin);
    std::vector<complex> pumped(m, complex(0.0, 0.0));
    pumped[m - 1] = 2.0 * drive.lambda_c / model.pump_mode.kappa;
    starts.push_back(to_real(pumped));
    std::vector<complex> kicked = pumped;
    kicked[0] = complex(opt.start_amplitude / 2.0, 0.0);
    starts.push_back(to_real(kicked));
    kicked[0] = complex(0.0, opt.start_amplitude / 2.0);
    starts.push_back(to_real(kicked));
    for (int i = 0; i < n_starts; ++i) {
        Eigen::VectorXd x(2 * m);
        for (int k = 0; k < 2 * m; ++k) x(k) = uni(rng);
        starts.push_back(x);
    }

    std::vector<SteadyState> found;
    for (const Eigen::VectorXd& x0 : starts) {
        const NewtonResult result = damped_newton(model, drive, x0, opt);
        if (!result.converged) continue;
        SteadyState state;
        state.amplitudes = to_complex(result.x);
        std::vector<complex> fz(m);
        scaled_field(model, drive, state.amplitudes, fz);
        state.residual = relative_residual(model, to_real(fz), result.x);
        state.stability = classify(model, state.amplitudes, state.jacobian_eigenvalues,
                                   opt.marginal_tolerance);
        // Amplitude resolution achievable at this root: residual leaks into
        // the soft directions as residual / |lambda_min|. Near a bifurcation
        // the eigenvalue crosses zero, so the estimate is capped.
        double lambda_min = kappa_max(model);
        for (const complex& ev : state.jacobian_eigenvalues) {
            lambda_min = std::min(lambda_min, std::abs(ev.real()));
        }
        const double scale = kappa_max(model) * (1.0 + result.x.norm());
        state.precision = std::min(1e-3, state.residual * scale /
                                             std::max(lambda_min, 1e-300));

        bool duplicate = false;
        for (const SteadyState& s : found) {
            double dist2 = 0.0;
            for (int i = 0; i < m; ++i) dist2 += std::norm(state.amplitudes[i] - s.amplitudes[i]);
            if (std::sqrt(dist2) <
                std::max(opt.dedup_tolerance, state.precision + s.precision)) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;
        found.push_back(std::move(state));
    }
    return found;
}

}  // namespace

double amplitude_scale(const AmplifierModel& model) {
    return std::sqrt(np_threshold_photons(model));
}

ScaledDrive scaled_drive(const AmplifierModel& model, const DriveConditions& drive) {
    const double scale = amplitude_scale(model);
    ScaledDrive out;
    const complex a_in = std::sqrt(drive.signal_flux) *
                         std::exp(complex(0.0, drive.signal_phase));
    const complex c_in = drive.pump_flux_amplitude *
                         std::exp(complex(0.0, -drive.pump_phase));
    out.lambda_a = std::sqrt(model.signal_mode.kappa) * a_in / scale;
    out.lambda_b = 0.0;
    out.lambda_c = std::sqrt(model.pump_mode.kappa) * c_in / scale;
    return out;
}

void scaled_field(const AmplifierModel& model, const ScaledDrive& drive,
                  const std::vector<complex>& v, std::vector<complex>& d) {
    const double ka = model.signal_mode.kappa;
    const double kc = model.pump_mode.kappa;
    d.resize(v.size());
    if (model.degenerate()) {
        const complex a = v[0], c = v[1];
        d[0] = -0.5 * ka * (a + std::conj(a) * c) + drive.lambda_a;
        d[1] = -0.5 * kc * c + 0.25 * ka * a * a + drive.lambda_c;
    } else {
        const double kb = model.idler_mode->kappa;
        const double sigma = 0.5 * std::sqrt(ka * kb);
        const complex a = v[0], b = v[1], c = v[2];
        d[0] = -0.5 * ka * a - sigma * std::conj(b) * c + drive.lambda_a;
        d[1] = -0.5 * kb * b - sigma * std::conj(a) * c + drive.lambda_b;
        d[2] = -0.5 * kc * c + sigma * a * b + drive.lambda_c;
    }
}

Eigen::MatrixXd scaled_jacobian(const AmplifierModel& model,
                                const std::vector<complex>& v) {
    const double ka = model.signal_mode.kappa;
    const double kc = model.pump_mode.kappa;
    const int m = mode_count(model);
    // Complex partials (df/dz, df/dzbar) realified into 2x2 blocks laid out
    // over the (Re..., Im...) ordering.
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    auto put = [&](int row, int col, complex df_dz, complex df_dzbar) {
        const complex fx = df_dz + df_dzbar;
        const complex fy = complex(0.0, 1.0) * (df_dz - df_dzbar);
        jac(row, col) = fx.real();
        jac(row, col + m) = fy.real();
        jac(row + m, col) = fx.imag();
        jac(row + m, col + m) = fy.imag();
    };
    if (model.degenerate()) {
        const complex a = v[0], c = v[1];
        put(0, 0, -0.5 * ka, -0.5 * ka * c);
        put(0, 1, -0.5 * ka * std::conj(a), 0.0);
        put(1, 0, 0.5 * ka * a, 0.0);
        put(1, 1, -0.5 * kc, 0.0);
    } else {
        const double kb = model.idler_mode->kappa;
        const double sigma = 0.5 * std::sqrt(ka * kb);
        const complex a = v[0], b = v[1], c = v[2];
        put(0, 0, -0.5 * ka, 0.0);
        put(0, 1, 0.0, -sigma * c);
        put(0, 2, -sigma * std::conj(b), 0.0);
        put(1, 0, 0.0, -sigma * c);
        put(1, 1, -0.5 * kb, 0.0);
        put(1, 2, -sigma * std::conj(a), 0.0);
        put(2, 0, sigma * b, 0.0);
        put(2, 1, sigma * a, 0.0);
        put(2, 2, -0.5 * kc, 0.0);
    }
    return jac;
}

namespace {

// With no signal or idler drive the non-degenerate equations are invariant
// under a -> a e^{i phi}, b -> b e^{-i phi}: above-threshold solutions come
// in continuous orbits. Two states lie on the same orbit iff the invariants
// (a b, c) and the moduli match. The degenerate amplifier has only the
// discrete a -> -a symmetry, whose pair are genuine distinct states.
bool same_orbit(const SteadyState& a, const SteadyState& b, bool u1_symmetry) {
    // Near the bifurcation the Newton precision along the soft direction is
    // limited, so the equivalence tolerance is much looser than the dedup
    // tolerance while staying far below any physical state separation.
    if (!u1_symmetry || a.amplitudes.size() != 3) return false;
    for (size_t i = 0; i < a.amplitudes.size(); ++i) {
        const double ra = std::abs(a.amplitudes[i]);
        const double rb = std::abs(b.amplitudes[i]);
        if (std::abs(ra - rb) > 1e-4 * (1.0 + ra)) return false;
    }
    const complex inv_a = a.amplitudes[0] * a.amplitudes[1];
    const complex inv_b = b.amplitudes[0] * b.amplitudes[1];
    return std::abs(inv_a - inv_b) < 1e-4 * (1.0 + std::abs(inv_a)) &&
           std::abs(a.amplitudes[2] - b.amplitudes[2]) < 1e-4 * (1.0 + std::abs(a.amplitudes[2]));
}

// Merge newly found states into the accumulated set; returns how many were
// new modulo phase-orbit equivalence. At most a handful of representatives
// per orbit are kept.
int merge_states(std::vector<SteadyState>& into, std::vector<SteadyState> found,
                 double dedup_tolerance, bool u1_symmetry) {
    constexpr int max_orbit_representatives = 8;
    int added = 0;
    for (SteadyState& candidate : found) {
        bool duplicate = false;
        int orbit_count = 0;
        for (const SteadyState& existing : into) {
            double dist2 = 0.0;
            for (size_t i = 0; i < existing.amplitudes.size(); ++i) {
                dist2 += std::norm(candidate.amplitudes[i] - existing.amplitudes[i]);
            }
            if (std::sqrt(dist2) <
                std::max(dedup_tolerance, candidate.precision + existing.precision)) {
                duplicate = true;
                break;
            }
            if (same_orbit(candidate, existing, u1_symmetry)) ++orbit_count;
        }
        if (duplicate || orbit_count >= max_orbit_representatives) continue;
        if (orbit_count == 0) ++added;
        into.push_back(std::move(candidate));
    }
    return added;
}

}  // namespace

std::vector<SteadyState> steady_states(const AmplifierModel& model, const ScaledDrive& drive,
                                       const SteadyStateOptions& opt) {
    // Roots with small Newton basins (the middle branch of a fold) appear
    // intermittently in any single multi-start run, so refinement rounds are
    // merged: the search stops once a denser round contributes nothing new.
    const bool u1_symmetry = !model.degenerate() && std::abs(drive.lambda_a) == 0.0 &&
                             std::abs(drive.lambda_b) == 0.0;
    std::vector<SteadyState> states;
    merge_states(states, run_multistart(model, drive, opt.multistart_points, opt),
                 opt.dedup_tolerance, u1_symmetry);
    int n_points = opt.refined_points;
    for (int round = 0; round <= opt.max_refinements; ++round) {
        SteadyStateOptions refined = opt;
        refined.seed = opt.seed + 0x9e37 * (round + 1);
        const int added =
            merge_states(states, run_multistart(model, drive, n_points, refined),
                         opt.dedup_tolerance, u1_symmetry);
        if (added == 0) {
            return states;
        }
        n_points *= 4;
    }
    throw SolverExhausted("multi-start budget consumed with inconsistent root counts");
}

std::vector<SteadyState> steady_states(const AmplifierModel& model, const DriveConditions& drive,
                                       const SteadyStateOptions& opt) {
    return steady_states(model, scaled_drive(model, drive), opt);
}

double zero_signal_threshold_flux(const AmplifierModel& model) {
    const double amp = pump_amplitude_for_rho0(model, 1.0);
    return amp * amp;
}

namespace {

DriveConditions threshold_drive(const AmplifierModel& model, double signal_flux,
                                double pump_flux) {
    DriveConditions drive;
    drive.pump_flux_amplitude = std::sqrt(pump_flux);
    drive.pump_phase = 0.0;
    drive.pump_frequency = model.degenerate()
        ? 2.0 * model.signal_mode.omega
        : model.signal_mode.omega + model.idler_mode->omega;
    drive.signal_flux = signal_flux;
    drive.signal_frequency = model.signal_mode.omega;
    // The degenerate amplifier is phase sensitive: drive the amplified
    // quadrature (with pump_phase = 0 that is the imaginary axis).
    drive.signal_phase = model.degenerate() ? two_pi / 4.0 : 0.0;
    return drive;
}

// Solution multiplicity, stability-blind. Below the oscillation region the
// classical equations have a unique steady solution; the oscillating region
// opens with a pitchfork (zero signal) or a fold of the anti-phase-locked
// pair (finite signal). The fold pair of the driven non-degenerate amplifier
// is saddle-type in the phase direction, so counting only strictly stable
// states would miss the onset entirely.
bool multiple_states(const std::vector<SteadyState>& states) {
    return states.size() >= 2;
}

const SteadyState* amplifier_state(const std::vector<SteadyState>& states) {
    const SteadyState* best = nullptr;
    for (const SteadyState& s : states) {
        if (s.stability == Stability::Unstable) continue;
        if (!best || std::abs(s.amplitudes[0]) > std::abs(best->amplitudes[0])) best = &s;
    }
    return best;
}

}  // namespace

ThresholdResult oscillation_threshold(const AmplifierModel& model, double signal_flux,
                                      const ThresholdOptions& opt) {
    if (signal_flux < 0.0) {
        throw InvalidParameter("signal_flux must be >= 0");
    }
    ThresholdResult result;
    const double p_zero = zero_signal_threshold_flux(model);
    const double cap = p_zero * std::pow(10.0, opt.cap_db_above_zero_signal / 10.0);
    result.pump_flux_cap = cap;

    auto multiplicity = [&](double pump_flux, std::vector<SteadyState>* states_out) {
        const DriveConditions drive = threshold_drive(model, signal_flux, pump_flux);
        std::vector<SteadyState> states = steady_states(model, drive, opt.steady_options);
        const bool multiple = multiple_states(states);
        if (states_out) *states_out = std::move(states);
        return multiple;
    };

    // Geometric scan upward until multiplicity appears, then bisect.
    double lo = cap * 1e-8;
    std::vector<SteadyState> states_lo;
    if (multiplicity(lo, &states_lo)) {
        result.status = ThresholdStatus::Inconclusive;  // no known-unique floor
        return result;
    }
    double hi = lo;
    bool found = false;
    while (hi < cap) {
        hi = std::min(hi * 2.0, cap);
        if (multiplicity(hi, nullptr)) {
            found = true;
            break;
        }
        lo = hi;
    }
    if (!found) {
        result.status = ThresholdStatus::NoThreshold;
        result.pump_flux_below = lo;
        return result;
    }
    while ((hi - lo) > opt.relative_tolerance * hi) {
        const double mid = std::sqrt(lo * hi);
        if (multiplicity(mid, nullptr)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    multiplicity(lo, &states_lo);
    const SteadyState* below = amplifier_state(states_lo);
    if (!below) {
        result.status = ThresholdStatus::Inconclusive;
        return result;
    }
    result.status = ThresholdStatus::Found;
    result.pump_flux_threshold = hi;
    result.pump_flux_below = lo;
    result.state_below = *below;
    return result;
}

double max_output_before_oscillation(const AmplifierModel& model, double signal_flux,
                                     const ThresholdOptions& opt) {
    const ThresholdResult threshold = oscillation_threshold(model, signal_flux, opt);
    if (threshold.status != ThresholdStatus::Found) {
        throw InvalidParameter("no oscillation threshold exists at this signal flux");
    }
    // The scaled pump amplitude modulus of the operating state is the
    // effective depleted coupling; reuse the mean-field output formula.
    const SteadyState& state = threshold.state_below;
    const double rho_eff = std::abs(state.amplitudes.back());
    DepletedOperatingPoint point;
    point.rho = rho_eff;
    point.rho0 = std::numeric_limits<double>::quiet_NaN();  // pump is above rho0 = 1 here
    point.gain = ideal_gain(rho_eff);
    point.p_in_coh = signal_flux;
    point.converged = true;
    return output_power(model, point);
}

}  // namespace paramp
