#include "paramp/depletion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace paramp {

namespace {

struct RhoEquation {
    double rho0 = 0.0;
    double signal_ratio = 0.0;  // P_in / P_c
    double vacuum_term = 0.0;   // g / (2 sqrt(kappa_c) |<c_in>|)

    // Depletion bracket, strictly decreasing on [0, 1).
    double bracket(double rho) const {
        const double one_minus = 1.0 - rho * rho;
        return 1.0 - rho0 * rho / (one_minus * one_minus) * signal_ratio -
               vacuum_term * rho / one_minus;
    }

    // Right-hand side of the self-consistency relation. The absolute value is
    // kept literally: rho is a coupling modulus.
    double map(double rho) const { return rho0 * std::abs(bracket(rho)); }
};

RhoEquation build_equation(const AmplifierModel& model, const DriveConditions& drive) {
    RhoEquation eq;
    eq.rho0 = reduced_coupling(model, drive);
    if (eq.rho0 >= 1.0) {
        throw AboveThreshold("undepleted rho0 >= 1; use the semiclassical steady-state solver");
    }
    const double p_c = drive.pump_flux();
    if (p_c <= 0.0) {
        throw InvalidParameter("pump flux must be positive for the depletion solve");
    }
    eq.signal_ratio = drive.signal_flux / p_c;
    eq.vacuum_term = model.coupling /
                     (2.0 * std::sqrt(model.pump_mode.kappa) * drive.pump_flux_amplitude);
    return eq;
}

DepletedOperatingPoint solve_fixed_point(const RhoEquation& eq, const RhoSolverOptions& opt) {
    DepletedOperatingPoint out;
    out.rho0 = eq.rho0;
    double rho = opt.initial_guess >= 0.0 ? opt.initial_guess : eq.rho0;
    std::vector<double> history;
    double checkpoint_delta = std::numeric_limits<double>::infinity();
    for (int k = 0; k < opt.max_iterations; ++k) {
        // Depletion only reduces the coupling: iterates stay in [0, rho0].
        // The unclamped map has a spurious attractor above rho = 1.
        const double next = std::clamp(
            (1.0 - opt.relaxation) * rho + opt.relaxation * eq.map(rho), 0.0, eq.rho0);
        const double delta = std::abs(next - rho);
        rho = next;
        if ((k & 1023) == 1023) {  // cycling map: stop early, callers fall back
            if (delta > 0.5 * checkpoint_delta) {
                throw NonConvergence("rho fixed point is cycling", {delta});
            }
            checkpoint_delta = delta;
        }
        if (delta < opt.tolerance) {
            const double residual = std::abs(rho - eq.map(rho));
            if (residual > 1e-9) {  // stuck on the clamp boundary
                throw NonConvergence("rho fixed point stalled off the root", {residual});
            }
            out.rho = rho;
            out.converged = true;
            out.iterations = k + 1;
            out.residual = residual;
            return out;
        }
        if (k >= opt.max_iterations - 64) history.push_back(delta);
    }
    std::ostringstream os;
    os << "rho fixed point did not converge in " << opt.max_iterations
       << " iterations (rho0 = " << eq.rho0 << ")";
    throw NonConvergence(os.str(), std::move(history));
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double f_lo) {
    while (hi - lo > 1e-16 * (1.0 + hi)) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Root solve of F(rho) = rho - map(rho) on [0, rho0]. The depletion bracket
// is strictly decreasing, so F is strictly increasing up to the bracket zero
// rho_B and carries exactly one root there: the branch continuously connected
// to weak drive. Past rho_B the |.| reflection can fold the map and admit
// further roots (the oscillation-region upper branch); those are scanned and
// the root nearest the warm-start guess is returned.
DepletedOperatingPoint solve_bracketed(const RhoEquation& eq, const RhoSolverOptions& opt) {
    DepletedOperatingPoint out;
    out.rho0 = eq.rho0;
    const double guess = opt.initial_guess >= 0.0 ? opt.initial_guess : eq.rho0;
    auto objective = [&](double rho) { return rho - eq.map(rho); };

    std::vector<double> roots;
    double rho_b = eq.rho0;  // upper end of the monotone segment
    if (eq.bracket(eq.rho0) < 0.0) {
        rho_b = bisect([&](double rho) { return eq.bracket(rho); }, 0.0, eq.rho0, 1.0);
    }
    // F(0) = -rho0 < 0 and F(rho_B) = rho_B - rho0 |bracket(rho_B)| with the
    // bracket either zero or still positive but below 1; either way the
    // monotone segment holds the physical root.
    if (objective(rho_b) >= 0.0) {
        roots.push_back(bisect(objective, 0.0, rho_b, -eq.rho0));
    }

    // Fold region beyond the bracket zero.
    if (rho_b < eq.rho0) {
        const int n_scan = 2000;
        double previous_rho = rho_b;
        double previous_f = objective(rho_b);
        for (int i = 1; i <= n_scan; ++i) {
            const double rho = rho_b + (eq.rho0 - rho_b) * i / n_scan;
            const double f = objective(rho);
            if ((previous_f < 0.0) != (f < 0.0)) {
                roots.push_back(bisect(objective, previous_rho, rho, previous_f));
            }
            previous_rho = rho;
            previous_f = f;
        }
    }
    if (roots.empty()) {
        throw NonConvergence("no self-consistent rho in [0, rho0]", {});
    }
    double best = roots.front();
    for (double root : roots) {
        if (std::abs(root - guess) < std::abs(best - guess)) best = root;
    }
    out.rho = best;
    out.converged = true;
    out.iterations = static_cast<int>(roots.size());
    out.residual = std::abs(objective(best));
    return out;
}

DepletedOperatingPoint solve_impl(const AmplifierModel& model, const DriveConditions& drive,
                                  const RhoSolverOptions& opt) {
    const RhoEquation eq = build_equation(model, drive);
    DepletedOperatingPoint out;
    if (opt.method == RhoSolverMethod::Bracketed) {
        out = solve_bracketed(eq, opt);
    } else {
        try {
            out = solve_fixed_point(eq, opt);
        } catch (const NonConvergence&) {
            // The relaxed map develops cycles when the signal term is steep;
            // fall back to the bracketed solve.
            out = solve_bracketed(eq, opt);
        }
    }
    out.gain = ideal_gain(out.rho);
    out.p_in_coh = drive.signal_flux;
    return out;
}

}  // namespace

DepletedOperatingPoint solve_rho_ndpa(const AmplifierModel& model, const DriveConditions& drive,
                                      const RhoSolverOptions& options) {
    if (model.degenerate()) {
        throw InvalidParameter("solve_rho_ndpa requires a non-degenerate model");
    }
    DepletedOperatingPoint point = solve_impl(model, drive, options);
    point.p_out_total = output_power(model, point);
    return point;
}

DepletedOperatingPoint solve_rho_dpa(const AmplifierModel& model, const DriveConditions& drive,
                                     const RhoSolverOptions& options) {
    if (!model.degenerate()) {
        throw InvalidParameter("solve_rho_dpa requires a degenerate model");
    }
    DepletedOperatingPoint point = solve_impl(model, drive, options);
    point.p_out_total = output_power(model, point);
    return point;
}

DepletedOperatingPoint solve_rho(const AmplifierModel& model, const DriveConditions& drive,
                                 const RhoSolverOptions& options) {
    return model.degenerate() ? solve_rho_dpa(model, drive, options)
                              : solve_rho_ndpa(model, drive, options);
}

double output_power(const AmplifierModel& model, const DepletedOperatingPoint& point) {
    const double g = point.gain;
    const double vacuum = model.signal_mode.kappa / std::sqrt(g) * (g - 1.0) *
                          (1.0 + point.rho * point.rho) / 8.0;
    const double coherent_coeff = model.degenerate() ? 2.0 * g - 1.0 : g;
    return coherent_coeff * point.p_in_coh + vacuum;
}

std::vector<GainSweepPoint> gain_sweep(const AmplifierModel& model,
                                       const DriveConditions& drive_template,
                                       const std::vector<double>& p_in_values,
                                       const RhoSolverOptions& options) {
    std::vector<GainSweepPoint> sweep;
    sweep.reserve(p_in_values.size());
    RhoSolverOptions opt = options;
    for (double p_in : p_in_values) {
        DriveConditions drive = drive_template;
        drive.signal_flux = p_in;
        GainSweepPoint row;
        row.p_in = p_in;
        row.point = solve_rho(model, drive, opt);
        opt.initial_guess = row.point.rho;  // continuation along the sweep
        sweep.push_back(row);
    }
    return sweep;
}

CompressionPoint compression_point(const AmplifierModel& model,
                                   const DriveConditions& drive_template,
                                   double target_drop_db, double p_in_min, double p_in_max,
                                   const RhoSolverOptions& options) {
    if (target_drop_db < 0.0) {
        throw InvalidParameter("target_drop_db must be >= 0");
    }
    if (!(p_in_min > 0.0 && p_in_max > p_in_min)) {
        throw InvalidParameter("need 0 < p_in_min < p_in_max");
    }

    auto gain_at = [&](double p_in, double guess) {
        DriveConditions drive = drive_template;
        drive.signal_flux = p_in;
        RhoSolverOptions opt = options;
        opt.initial_guess = guess;
        return solve_rho(model, drive, opt);
    };

    // Reference: small-signal gain, i.e. the pump depleted by vacuum
    // fluctuations only.
    DriveConditions zero_drive = drive_template;
    zero_drive.signal_flux = 0.0;
    const DepletedOperatingPoint small_signal = solve_rho(model, zero_drive, options);
    const double reference_gain = small_signal.gain;
    const double target_gain = reference_gain * std::pow(10.0, -0.1 * target_drop_db);

    CompressionPoint result;
    result.reference_gain = reference_gain;
    if (target_drop_db == 0.0) {
        result.p_in_1db = p_in_min;
        result.gain_at_point = gain_at(p_in_min, small_signal.rho).gain;
        return result;
    }

    DepletedOperatingPoint at_min = gain_at(p_in_min, small_signal.rho);
    if (at_min.gain <= target_gain) {
        result.p_in_1db = p_in_min;
        result.gain_at_point = at_min.gain;
        return result;
    }
    DepletedOperatingPoint at_max = gain_at(p_in_max, at_min.rho);
    if (at_max.gain > target_gain) {
        throw NotCompressed("gain never drops by the requested amount inside the sweep window");
    }

    double lo = std::log(p_in_min);
    double hi = std::log(p_in_max);
    double guess = at_min.rho;
    double gain_mid = at_min.gain;
    double mid = lo;
    while (hi - lo > 1e-6) {  // relative tolerance on P_in via log spacing
        mid = 0.5 * (lo + hi);
        const DepletedOperatingPoint point = gain_at(std::exp(mid), guess);
        guess = point.rho;
        gain_mid = point.gain;
        if (point.gain > target_gain) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    result.p_in_1db = std::exp(mid);
    result.gain_at_point = gain_mid;
    return result;
}

double compression_line_slope(const AmplifierModel& model,
                              const std::vector<CompressionPoint>& points) {
    if (points.size() < 2) {
        throw InvalidParameter("need at least two compression points for a slope");
    }
    const double carrier = model.signal_mode.omega;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(points.size());
    for (const CompressionPoint& p : points) {
        const double x = flux_to_dbm(p.p_in_1db, carrier);
        const double y = 10.0 * std::log10(p.gain_at_point);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace paramp
