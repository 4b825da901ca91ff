#pragma once

#include <stdexcept>
#include <string>

namespace fideval {

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input image or file could not be decoded.
class DecodeError : public Error {
public:
    using Error::Error;
};

/// A documented precondition (sizes, parameter ranges) was violated.
class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace fideval
