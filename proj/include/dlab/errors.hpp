#pragma once

#include <stdexcept>
#include <string>

namespace dlab {

// Error taxonomy mirrors the CLI exit codes: config -> 2, data -> 3,
// numerical failure -> 4. Everything else is a plain Error (exit 1).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

}  // namespace dlab
