#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rvarpro {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad argument: wrong sizes, non-positive tolerances, y <= 0 for a 2D PSF.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// A symmetric factorization broke down at `pivot()`.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, std::size_t pivot)
        : Error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

// Parameter outside a regularizer's or operator family's domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// The model assumptions fail, e.g. N(A(y)) and N(L) intersect nontrivially.
class ModelError : public Error {
public:
    using Error::Error;
};

// Floating-point results that violate a stated invariant (imaginary residue, NaN).
class NumericError : public Error {
public:
    using Error::Error;
};

// Outer-loop failure, tagged with the iteration at which it happened.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::size_t iteration)
        : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rvarpro
