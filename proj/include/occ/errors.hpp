#pragma once

#include <stdexcept>
#include <string>

namespace occ {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or mismatched inputs (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

// Filesystem failures (CLI exit code 3).
struct IoError : Error {
    using Error::Error;
};

// Corrupt containers, truncated bitstreams, encoder/decoder desync (CLI exit code 4).
struct IntegrityError : Error {
    using Error::Error;
};

// Replay predictor ran out of pre-computed distributions.
struct StreamEndError : Error {
    using Error::Error;
};

}  // namespace occ
