#pragma once

#include <stdexcept>
#include <string>

namespace pscat {

// Base class for every failure raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad inputs: malformed scenarios, parameters outside their domain.
struct ConfigError : Error {
    using Error::Error;
};

// The numerics gave up: non-convergence, inadequate grids, unstable evaluations.
struct NumericalError : Error {
    using Error::Error;
};

struct InvalidParameter : ConfigError {
    using ConfigError::ConfigError;
};
struct NonConservedMomentum : ConfigError {
    using ConfigError::ConfigError;
};
struct BelowThreshold : ConfigError {
    using ConfigError::ConfigError;
};
struct OutOfDomain : ConfigError {
    using ConfigError::ConfigError;
};

struct NormalizationFailure : NumericalError {
    using NumericalError::NumericalError;
};
struct QuadratureNonConvergence : NumericalError {
    using NumericalError::NumericalError;
};
struct GridTooCoarse : NumericalError {
    using NumericalError::NumericalError;
};
struct AliasingDetected : NumericalError {
    using NumericalError::NumericalError;
};
struct WignerGradientUnstable : NumericalError {
    using NumericalError::NumericalError;
};
struct NonConvergence : NumericalError {
    using NumericalError::NumericalError;
};
struct NegativeValueBeyondError : NumericalError {
    using NumericalError::NumericalError;
};

} // namespace pscat
