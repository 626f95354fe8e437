#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace nomaspc {

/// Shortest %g rendering used in diagnostics.
inline std::string format_number(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. Ei(0)).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Adaptive integration ran out of subdivisions before meeting tolerance.
class NonConvergence : public Error {
public:
    using Error::Error;
};

/// Term enumeration would exceed the configured composition cap.
class CombinatorialBlowup : public Error {
public:
    using Error::Error;
};

/// A deterministic tier produced a value outside [0,1] by more than the
/// allowed rounding slack.
class PrecisionLoss : public Error {
public:
    using Error::Error;
};

/// The linearization window reaches the interference-limited SINR ceiling
/// alpha_H / alpha_L.
class CeilingViolation : public Error {
public:
    using Error::Error;
};

/// The low-priority reliability target cannot be met once the
/// high-priority target fixes the SIC stage.
class InfeasibleTargets : public Error {
public:
    using Error::Error;
};

class MaxIterations : public Error {
public:
    using Error::Error;
};

/// Malformed scenario file or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace nomaspc
