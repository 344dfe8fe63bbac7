#pragma once

#include <stdexcept>
#include <string>

namespace kolmo {

// Base of every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Violated precondition on a scalar argument (negative time, alpha outside (0,1), ...).
struct InvalidArgument : Error {
    using Error::Error;
};

// Non-finite samples or malformed arrays.
struct DataError : Error {
    using Error::Error;
};

struct GridMismatch : Error {
    using Error::Error;
};

// A numerical guard refused to report a result (boundary energy, aliasing, quadrature resolution).
struct GuardError : Error {
    using Error::Error;
};

struct UnsupportedVariant : Error {
    using Error::Error;
};

struct NotThick : Error {
    using Error::Error;
};

struct ZeroRestrictedNorm : Error {
    using Error::Error;
};

struct SequenceError : Error {
    SequenceError(const std::string& what, int failing_m) : Error(what), failing_m(failing_m) {}
    int failing_m;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace kolmo
