#pragma once

#include <stdexcept>
#include <string>

namespace cstk {

/// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (vector length vs matrix dimension, index out of range).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Caller supplied arguments outside an operation's domain (negative tolerance,
/// sparsity above dimension, violated theorem hypothesis, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative method diverged, hit its iteration limit without a usable
/// answer, or the problem turned out to be infeasible / rank deficient.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Exhaustive enumeration would exceed the configured cap.
class EnumerationCapError : public Error {
public:
    using Error::Error;
};

}  // namespace cstk
