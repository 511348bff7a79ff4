#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace surfgrow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coefficient left the finite range (blow-up of the approximation itself).
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Symmetric eigensolver exhausted its iteration budget or failed its certificate.
class NoConvergenceError : public Error {
public:
    using Error::Error;
};

/// Too few modes for the rigorous eigenvalue bound, n < sqrt(2) * C_phi.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Splitting parameters violate delta in (0,1), eps > 0, sum eps = 1.
class InvalidParamsError : public Error {
public:
    using Error::Error;
};

/// Contract violation on an argument (sizes, ranges).
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

/// Malformed initial-condition expression or configuration text.
class ParseError : public Error {
public:
    ParseError(std::string message, std::size_t position)
        : Error(message + " at position " + std::to_string(position)),
          position_(position) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace surfgrow
