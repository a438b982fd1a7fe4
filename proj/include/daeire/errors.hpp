#pragma once

#include <stdexcept>
#include <string>

namespace daeire {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : Error {
    int line = 0;
    int column = 0;
    ParseError(const std::string& what, int line_, int col_)
        : Error("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) + ": " + what),
          line(line_),
          column(col_) {}
};

struct UnassignedVariableError : Error {
    using Error::Error;
};

struct DivisionByZeroError : Error {
    using Error::Error;
};

struct NonSquareError : Error {
    int equations = 0;
    int variables = 0;
    NonSquareError(int eqs, int vars)
        : Error("system is not square: " + std::to_string(eqs) + " equations, " + std::to_string(vars) +
                " variables"),
          equations(eqs),
          variables(vars) {}
};

struct EmptySystemError : Error {
    EmptySystemError() : Error("empty system: no equations and no variables") {}
};

struct NoPerfectMatchingError : Error {
    NoPerfectMatchingError() : Error("the DAE does not admit a perfect matching") {}
};

struct SingularMatrixError : Error {
    using Error::Error;
};

struct VerificationFailedError : Error {
    using Error::Error;
};

struct NoConvergenceError : Error {
    using Error::Error;
};

struct NonPolynomialError : Error {
    using Error::Error;
};

struct EmptyWitnessError : Error {
    using Error::Error;
};

/// Raised by the reduction loop when the remaining degrees of freedom cannot
/// absorb the detected rank deficiency.
struct NoSolutionError : Error {
    NoSolutionError() : Error("this DAE does not have a solution") {}
};

struct MaxPassesError : Error {
    explicit MaxPassesError(int passes)
        : Error("index reduction did not terminate within " + std::to_string(passes) + " passes") {}
};

}  // namespace daeire
