#pragma once

#include <stdexcept>
#include <string>

namespace mcc {

// Base for every error this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimMismatch : Error {
    using Error::Error;
};
struct ZeroNormVector : Error {
    using Error::Error;
};
struct BatchTooSmall : Error {
    using Error::Error;
};
struct AllZeroMatrix : Error {
    using Error::Error;
};
struct IndexOutOfRange : Error {
    using Error::Error;
};
struct NondifferentiablePoint : Error {
    using Error::Error;
};
struct StaleCache : Error {
    using Error::Error;
};
struct EmptyDataset : Error {
    using Error::Error;
};
struct IndivisibleClasses : Error {
    using Error::Error;
};
struct ShapeMismatch : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace mcc
