#pragma once

#include <stdexcept>
#include <string>

namespace wpcn {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
public:
    using Error::Error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of a rate or KKT function.
class DomainError : public Error {
public:
    using Error::Error;
};

// A multiplier hit a value for which the closed-form update is undefined
// (lambda1 = 0, lambda2 = 0, lambda3 = lambda4 = 0).
class DegenerateError : public Error {
public:
    using Error::Error;
};

class UnboundedError : public Error {
public:
    using Error::Error;
};

// A solve inside a larger experiment did not certify.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool ok, const char* what)
{
    if (!ok) throw DomainError(what);
}

} // namespace detail
} // namespace wpcn
