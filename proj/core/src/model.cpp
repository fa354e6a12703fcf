#include "paramp/model.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>

namespace paramp {

namespace {

std::mutex g_warn_mutex;
WarningHandler g_warn_handler;

}  // namespace

void set_warning_handler(WarningHandler handler) {
    std::lock_guard<std::mutex> lock(g_warn_mutex);
    g_warn_handler = std::move(handler);
}

void emit_warning(const std::string& message) {
    WarningHandler handler;
    {
        std::lock_guard<std::mutex> lock(g_warn_mutex);
        handler = g_warn_handler;
    }
    if (handler) {
        handler(message);
    } else {
        std::cerr << "paramp: warning: " << message << "\n";
    }
}

void ModeParams::validate(const char* label) const {
    if (!(omega > 0.0)) {
        throw InvalidParameter(std::string(label) + ": omega must be > 0");
    }
    if (!(kappa > 0.0)) {
        throw InvalidParameter(std::string(label) + ": kappa must be > 0");
    }
    if (omega / kappa <= 10.0) {
        std::ostringstream os;
        os << label << ": omega/kappa = " << omega / kappa
           << " <= 10, rotating-wave treatment is marginal";
        emit_warning(os.str());
    }
}

void AmplifierModel::validate() const {
    signal_mode.validate("signal_mode");
    pump_mode.validate("pump_mode");
    if (topology == Topology::NonDegenerate) {
        if (!idler_mode) {
            throw InvalidParameter("non-degenerate model requires an idler mode");
        }
        idler_mode->validate("idler_mode");
    } else if (idler_mode) {
        throw InvalidParameter("degenerate model must not carry an idler mode");
    }
    if (!(coupling > 0.0)) {
        throw InvalidParameter("coupling must be > 0");
    }
    double min_kappa = std::min(signal_mode.kappa, pump_mode.kappa);
    if (idler_mode) min_kappa = std::min(min_kappa, idler_mode->kappa);
    if (coupling > min_kappa / 10.0) {
        std::ostringstream os;
        os << "coupling g = " << coupling << " exceeds min(kappa)/10 = "
           << min_kappa / 10.0 << "; effective-Hamiltonian reduction is marginal";
        emit_warning(os.str());
    }
    const double kappa_fast = idler_mode
        ? std::max(signal_mode.kappa, idler_mode->kappa)
        : signal_mode.kappa;
    if (pump_mode.kappa < kappa_fast) {
        throw InvalidParameter("pump mode must decay at least as fast as the amplified modes");
    }
    if (pump_mode.kappa < 3.0 * kappa_fast) {
        std::ostringstream os;
        os << "kappa_c/kappa_a = " << pump_mode.kappa / kappa_fast
           << " < 3; the stiff-pump hierarchy is weak";
        emit_warning(os.str());
    }
}

void DriveConditions::validate() const {
    if (pump_flux_amplitude < 0.0) {
        throw InvalidParameter("pump_flux_amplitude must be >= 0");
    }
    if (signal_flux < 0.0) {
        throw InvalidParameter("signal_flux must be >= 0");
    }
}

bool resonant_pumping(const AmplifierModel& model, const DriveConditions& drive) {
    const double target = model.degenerate()
        ? 2.0 * model.signal_mode.omega
        : model.signal_mode.omega + model.idler_mode->omega;
    return std::abs(drive.pump_frequency - target) <= 1e-9 * target;
}

complex susceptibility(const ModeParams& mode, double omega) {
    return 1.0 / (1.0 - complex(0.0, 2.0) * (omega - mode.omega) / mode.kappa);
}

EffectiveDrive effective_drive(const AmplifierModel& model, const DriveConditions& drive) {
    EffectiveDrive eff;
    eff.g = 2.0 * model.coupling * drive.pump_flux_amplitude / std::sqrt(model.pump_mode.kappa);
    eff.Omega = drive.pump_frequency;
    eff.theta = drive.pump_phase;
    return eff;
}

double rho_ndpa_effective(double g_ab, double kappa_a, double kappa_b) {
    return 2.0 * g_ab / std::sqrt(kappa_a * kappa_b);
}

double rho_dpa_effective(double g_aa, double kappa_a) {
    return 4.0 * g_aa / kappa_a;
}

double reduced_coupling(const AmplifierModel& model, const DriveConditions& drive) {
    const EffectiveDrive eff = effective_drive(model, drive);
    if (model.degenerate()) {
        return rho_dpa_effective(eff.g, model.signal_mode.kappa);
    }
    return rho_ndpa_effective(eff.g, model.signal_mode.kappa, model.idler_mode->kappa);
}

double pump_amplitude_for_rho0(const AmplifierModel& model, double rho0) {
    const double ka = model.signal_mode.kappa;
    const double kc = model.pump_mode.kappa;
    if (model.degenerate()) {
        return rho0 * ka * std::sqrt(kc) / (8.0 * model.coupling);
    }
    const double kb = model.idler_mode->kappa;
    return rho0 * std::sqrt(ka * kb * kc) / (4.0 * model.coupling);
}

double ideal_gain(double rho) {
    if (rho < 0.0) {
        throw InvalidParameter("rho must be >= 0");
    }
    if (rho >= 1.0) {
        throw StabilityViolation(
            "rho >= 1: amplification turns into spontaneous parametric oscillation");
    }
    const double r2 = rho * rho;
    const double ratio = (1.0 + r2) / (1.0 - r2);
    return ratio * ratio;
}

double rho_for_gain(double gain) {
    if (gain < 1.0) {
        throw InvalidParameter("gain must be >= 1");
    }
    const double s = std::sqrt(gain);
    return std::sqrt((s - 1.0) / (s + 1.0));
}

double flux_to_dbm(double flux, double carrier) {
    if (flux < 0.0) {
        throw InvalidParameter("flux must be >= 0");
    }
    if (carrier <= 0.0) {
        throw InvalidParameter("carrier must be > 0");
    }
    if (flux == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(hbar * carrier * flux / 1e-3);
}

double dbm_to_flux(double dbm, double carrier) {
    if (carrier <= 0.0) {
        throw InvalidParameter("carrier must be > 0");
    }
    if (std::isinf(dbm) && dbm < 0.0) {
        return 0.0;
    }
    return 1e-3 * std::pow(10.0, dbm / 10.0) / (hbar * carrier);
}

}  // namespace paramp
