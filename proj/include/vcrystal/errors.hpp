#pragma once

#include <stdexcept>
#include <string>

namespace vcrystal {

// Bad input or configuration. Maps to exit code 1.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Anything that goes wrong inside a computation. Maps to exit code 2.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define VCRYSTAL_NUMERICAL_ERROR(Name)                \
    struct Name : NumericalError {                    \
        using NumericalError::NumericalError;         \
    };

VCRYSTAL_NUMERICAL_ERROR(CollisionError)
VCRYSTAL_NUMERICAL_ERROR(StepFailure)
VCRYSTAL_NUMERICAL_ERROR(GridTooCoarse)
VCRYSTAL_NUMERICAL_ERROR(SingularSystem)
VCRYSTAL_NUMERICAL_ERROR(OrthogonalityViolated)
VCRYSTAL_NUMERICAL_ERROR(UnboundedQuotient)
VCRYSTAL_NUMERICAL_ERROR(DegenerateDenominator)
VCRYSTAL_NUMERICAL_ERROR(CFLViolation)
VCRYSTAL_NUMERICAL_ERROR(NaNDetected)
VCRYSTAL_NUMERICAL_ERROR(BlobLost)
VCRYSTAL_NUMERICAL_ERROR(InsufficientWindow)
VCRYSTAL_NUMERICAL_ERROR(InterpolationOutOfRange)

#undef VCRYSTAL_NUMERICAL_ERROR

} // namespace vcrystal
