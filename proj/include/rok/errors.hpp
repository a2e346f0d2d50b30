// Exception types shared by all rok modules.

#pragma once

#include <stdexcept>
#include <string>

namespace rok {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes, point sets, or coefficient lengths do not line up.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// A Gram matrix is indefinite beyond the requested tolerance.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

// A moment kernel fails K_shift <= K.
class ShiftDominationViolated : public Error {
public:
    using Error::Error;
};

// An eigensolver or SVD did not converge, or a square root input is
// indefinite beyond round-off.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class TooFewPoints : public Error {
public:
    using Error::Error;
};

class NonHermitianDiagonal : public Error {
public:
    using Error::Error;
};

// The shift operator cannot be recovered consistently from the factor.
class IllConditioned : public Error {
public:
    using Error::Error;
};

class EmptyPolynomial : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Malformed input files (JSON schema violations, unreadable paths).
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace rok
