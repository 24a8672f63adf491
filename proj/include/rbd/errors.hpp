#pragma once

#include <stdexcept>
#include <string>

namespace rbd {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input bytes (EDF, sidecar files, model files, CSV).
struct ParseError : Error {
    explicit ParseError(const std::string& what, long long byte_offset = -1)
        : Error(byte_offset >= 0 ? what + " (at byte " + std::to_string(byte_offset) + ")" : what),
          offset(byte_offset) {}
    long long offset;
};

// A requested montage channel is not present in the recording.
struct MontageError : Error {
    using Error::Error;
};

// Invalid argument to an operation (bad filter order, rate, fold count...).
struct ArgumentError : Error {
    using Error::Error;
};

// Signal shorter than one epoch.
struct EmptyGridError : Error {
    using Error::Error;
};

// Feature schema of a matrix does not match the model / other matrix.
struct SchemaError : Error {
    using Error::Error;
};

// A statistic has no defined value for the given input (e.g. kappa with
// zero usable epochs, correlation with n < 3).
struct UndefinedError : Error {
    using Error::Error;
};

// A subject metric required by a detector is missing.
struct MissingMetricError : Error {
    using Error::Error;
};

// Bad run configuration (missing path, unknown key...).
struct ConfigError : Error {
    using Error::Error;
};

// A broken internal invariant (e.g. cross-validation leakage). Maps to a
// distinct process exit code in the CLI.
struct InternalError : Error {
    using Error::Error;
};

}  // namespace rbd
