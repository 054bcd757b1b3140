#pragma once

#include <stdexcept>
#include <string>

namespace semalloc {

// Base for all library failures. Callers that only care about "did it work"
// catch this one.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Root finder called with f(lo) and f(hi) of the same sign.
class BracketError : public Error {
public:
    using Error::Error;
};

// Iteration cap reached before the tolerance was met.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Derivative requested at a point where it does not exist.
class SingularityError : public Error {
public:
    using Error::Error;
};

// Perception target cannot be met (or is met for free) on the feasible set.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// Malformed input file or configuration.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace semalloc
