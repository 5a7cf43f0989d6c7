#pragma once

#include <stdexcept>
#include <string>

namespace entropy_flow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input rejected before any numerics ran (bad sizes, NaN values, all-zero grid).
class ValidationError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class GridMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DegenerateScale : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Errors caused by the numerical domain rather than the caller's syntax.
class NumericalDomainError : public Error {
public:
    using Error::Error;
};

/// Too much mass sits on the outer layers of the grid: the domain is too small.
class TailMassError : public NumericalDomainError {
public:
    using NumericalDomainError::NumericalDomainError;
};

class NotNormalized : public NumericalDomainError {
public:
    using NumericalDomainError::NumericalDomainError;
};

class ZeroMass : public NumericalDomainError {
public:
    using NumericalDomainError::NumericalDomainError;
};

}  // namespace entropy_flow
