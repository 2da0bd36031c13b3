#pragma once

#include <stdexcept>
#include <string>

namespace hlflock {

/// Invalid or inconsistent run configuration. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Failure to read or write an output artifact. Maps to CLI exit code 3.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A runtime invariant of the dynamics was violated. Always a bug; CLI exit code 4.
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hlflock
