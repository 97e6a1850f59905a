#ifndef MLTRL_ERRORS_HPP
#define MLTRL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mltrl {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid or inconsistent input values (bad lengths, bad table, bad config).
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

/// Frequency outside a tabulated dispersion range.
class RangeError : public Error {
public:
    explicit RangeError(const std::string& msg) : Error(msg) {}
};

/// Waveguide evaluated at or below its cutoff frequency.
class BelowCutoffError : public Error {
public:
    explicit BelowCutoffError(const std::string& msg) : Error(msg) {}
};

/// Requested design cannot satisfy its constraints.
class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& msg) : Error(msg) {}
};

/// Numerically degenerate input (singular measurement, vanishing eigenvalue).
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& msg) : Error(msg) {}
};

/// Ruler order outside the embedded tables.
class UnsupportedOrderError : public Error {
public:
    explicit UnsupportedOrderError(const std::string& msg) : Error(msg) {}
};

} // namespace mltrl

#endif
