#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace paramp {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Requested operating point is at or beyond the parametric oscillation
// threshold (rho >= 1), where the linear amplifier description breaks down.
class StabilityViolation : public Error {
public:
    using Error::Error;
};

// Pump detuned from the precisely tuned degenerate condition; only the tuned
// case is implemented.
class UnsupportedDetuning : public Error {
public:
    using Error::Error;
};

// Fixed-point / Newton iteration failed to converge.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, std::vector<double> residual_history)
        : Error(what), residuals(std::move(residual_history)) {}
    std::vector<double> residuals;
};

// Undepleted coupling already >= 1: mean-field depletion theory does not
// apply, use the semiclassical module instead.
class AboveThreshold : public Error {
public:
    using Error::Error;
};

// Gain never dropped by the requested amount inside the sweep window.
class NotCompressed : public Error {
public:
    using Error::Error;
};

// Multi-start root search returned inconsistent root counts after refinement.
class SolverExhausted : public Error {
public:
    using Error::Error;
};

// Drift has a near-zero eigenvalue: the Lyapunov solve is ill-posed, sample
// the distribution stochastically instead.
class MarginallyStable : public Error {
public:
    using Error::Error;
};

// Steady amplitudes cannot be rotated onto the real axis, so the factorized
// quadrature form of the Fokker-Planck equation is unavailable.
class PhaseConventionUnavailable : public Error {
public:
    using Error::Error;
};

// Requested grid captures less than the required probability mass.
class GridTooNarrow : public Error {
public:
    using Error::Error;
};

// A stochastic trajectory diverged (amplitude guard exceeded).
class StepInstability : public Error {
public:
    using Error::Error;
};

// Fewer effective samples than required for the requested estimate.
class InsufficientSamples : public Error {
public:
    using Error::Error;
};

// Frequency-matching Newton iteration failed.
class NoMatching : public Error {
public:
    using Error::Error;
};

// SQUID biased too close to half a flux quantum, Josephson inductance diverges.
class FluxNearHalfQuantum : public Error {
public:
    using Error::Error;
};

// Invalid input values (broken type invariants).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

// Soft validity violations (RWA margins, hierarchy ratios) are reported
// through this sink instead of failing. Default prints to stderr.
using WarningHandler = std::function<void(const std::string&)>;

void set_warning_handler(WarningHandler handler);
void emit_warning(const std::string& message);

}  // namespace paramp
