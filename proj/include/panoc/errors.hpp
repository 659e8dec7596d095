#pragma once

#include <stdexcept>
#include <string>

namespace panoc {

// Base class for everything this library throws on purpose.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A prox evaluation was requested at a stepsize at or above the oracle's
// prox-boundedness threshold.
struct ProxBoundViolation : SolverError {
    using SolverError::SolverError;
};

// An oracle produced NaN (anywhere) or a non-finite value where a finite one
// is required (f, gradients, prox points, g at a returned prox point).
struct OracleFailure : SolverError {
    using SolverError::SolverError;
};

// The inner loop of an inexact prox ran out of iterations before reaching
// its requested stationarity tolerance.
struct InnerBudgetExhausted : SolverError {
    using SolverError::SolverError;
};

// An operation was called outside its domain (zero base point for the
// divergence direction, non-scalar problem for 1-D-only directions, ...).
struct DomainError : SolverError {
    using SolverError::SolverError;
};

// Unknown bench problem id.
struct UnknownProblem : SolverError {
    using SolverError::SolverError;
};

// A guaranteed inequality failed at runtime beyond rounding slack. This is
// a bug detector, not a user error.
struct InvariantViolation : SolverError {
    using SolverError::SolverError;
};

enum class SolveStatus {
    Converged,
    BudgetExhausted,
    OracleError, // stepsize collapsed to the floor: oracles are inconsistent
};

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "Converged";
        case SolveStatus::BudgetExhausted: return "BudgetExhausted";
        case SolveStatus::OracleError: return "OracleError";
    }
    return "?";
}

} // namespace panoc
