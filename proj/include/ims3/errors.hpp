#pragma once

#include <stdexcept>
#include <string>

namespace ims3 {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroNormInput : Error {
    using Error::Error;
};
struct NonFiniteGradient : Error {
    using Error::Error;
};
struct InvalidScheduleBounds : Error {
    using Error::Error;
};
struct InvalidStepCount : Error {
    using Error::Error;
};
struct BadClassId : Error {
    using Error::Error;
};
struct BadTimestep : Error {
    using Error::Error;
};
struct BadTimestepOrder : Error {
    using Error::Error;
};
struct NonFiniteLoss : Error {
    using Error::Error;
};
struct DegenerateCentroid : Error {
    using Error::Error;
};
struct SearchSpaceTooLarge : Error {
    using Error::Error;
};
struct TrainingDiverged : Error {
    using Error::Error;
};
struct NonFiniteJacobian : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct ShapeMismatch : Error {
    using Error::Error;
};

}  // namespace ims3
