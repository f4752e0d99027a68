#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dynframe {

#ifdef DYNFRAME_REAL32
using real = float;
#else
using real = double;
#endif

// Bad user input at the operator surface (missing flags, invalid values).
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& m) : std::runtime_error(m) {}
};

// Malformed datasets, checkpoints, or config files.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& m) : std::runtime_error(m) {}
};

// Non-finite values, shape mismatches, degenerate lattices.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& m) : std::runtime_error(m) {}
};

// An invariance or frame property check failed.
struct PropertyViolation : std::runtime_error {
    explicit PropertyViolation(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace dynframe
