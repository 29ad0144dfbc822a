#pragma once

#include <stdexcept>
#include <string>

namespace longrisk {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violates an operation's argument contract (bad range, too few points).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A value lies outside its mathematical domain (q >= 1, mu < 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed input structure: missing grid cells, duplicates, unparsable rows.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Mortality data does not cover a requested age/year diagonal.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// An iterative procedure failed to converge within its budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Degenerate model input, e.g. sum(beta) == 0.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// Numeric failure: Cholesky breakdown, non-finite intermediate values.
class NumericError : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace longrisk
