#pragma once

#include <stdexcept>
#include <string>

namespace sfd {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParameter : Error {
    using Error::Error;
};

struct StepOutOfRange : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NonFiniteLoss : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct SchemaViolation : Error {
    using Error::Error;
};

struct VersionMismatch : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace sfd
