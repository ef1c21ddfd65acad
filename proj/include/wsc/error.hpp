#pragma once

#include <stdexcept>
#include <string>

namespace wsc {

// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Vector/matrix/pattern dimensions do not agree.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// A caller-supplied argument violates a precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// File could not be read/written or ended prematurely.
class IoError : public Error {
public:
    using Error::Error;
};

// File content does not match the expected on-disk format.
class FormatError : public Error {
public:
    using Error::Error;
};

// Two inputs that must agree (e.g. image/label counts) do not.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// An exact integer result does not fit the return type.
class OverflowError : public Error {
public:
    using Error::Error;
};

}  // namespace wsc
