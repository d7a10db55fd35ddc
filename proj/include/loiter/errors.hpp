// errors.hpp: exception hierarchy shared across the library.
// Each class maps to a CLI exit code (see tools/loiter_main.cpp and README).

#pragma once

#include <stdexcept>
#include <string>

namespace loiter {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Configuration file / schema problems (exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

/// Dynamics evaluation problems: degenerate positions, out-of-span ephemeris
/// queries, integrator step underflow, NaN/overflow detection (exit code 3).
struct DynamicsError : Error {
    using Error::Error;
};

/// SCP-level failures: iteration cap without convergence where convergence is
/// required, retry-cap exhaustion (exit code 4).
struct SolverError : Error {
    using Error::Error;
};

/// Conic backend failures (exit code 5).
struct BackendError : Error {
    using Error::Error;
};

}  // namespace loiter
