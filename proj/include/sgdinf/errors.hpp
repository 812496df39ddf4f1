#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgdinf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidDesign : Error {
    using Error::Error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct OracleFailure : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

struct ScheduleError : Error {
    using Error::Error;
};

struct ProtocolError : Error {
    using Error::Error;
};

struct EstimatorError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Thrown when an iterate leaves the finite range; carries the step that produced it.
struct DivergenceError : Error {
    explicit DivergenceError(std::size_t iter)
        : Error("SGD diverged: non-finite iterate at step " + std::to_string(iter)), iteration(iter) {}
    std::size_t iteration;
};

}  // namespace sgdinf
