#pragma once

#include <stdexcept>
#include <string>

namespace gaitsim {

// Malformed or inconsistent input data (event files, frames, weights).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two frames or grids whose shapes do not line up.
class DimensionError : public DataError {
public:
    using DataError::DataError;
};

// An operation that needs at least one set bit got an empty frame.
class EmptyFrameError : public DataError {
public:
    using DataError::DataError;
};

// Invalid configuration value or unknown key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gaitsim
