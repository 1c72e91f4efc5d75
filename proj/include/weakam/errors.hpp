#pragma once
#include <stdexcept>
#include <string>

namespace weakam {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration / input errors (CLI exit code 2).
struct ConfigError : Error { using Error::Error; };
struct UnknownPreset : ConfigError { using ConfigError::ConfigError; };
struct ParamOutOfRange : ConfigError { using ConfigError::ConfigError; };
struct GridTooCoarse : ConfigError { using ConfigError::ConfigError; };

// Numerical / state errors (CLI exit code 3).
struct NumericalError : Error { using Error::Error; };
struct NotDissipative : NumericalError { using NumericalError::NumericalError; };
struct NotCritical : NumericalError { using NumericalError::NumericalError; };
struct NoConvergence : NumericalError { using NumericalError::NumericalError; };
struct NonFinite : NumericalError { using NumericalError::NumericalError; };
struct NonConvexDetected : NumericalError { using NumericalError::NumericalError; };
struct ModelMismatch : NumericalError { using NumericalError::NumericalError; };
struct NonPositiveDelta : NumericalError { using NumericalError::NumericalError; };
struct NotSubsolution : NumericalError { using NumericalError::NumericalError; };
struct NotConverged : NumericalError { using NumericalError::NumericalError; };

} // namespace weakam
