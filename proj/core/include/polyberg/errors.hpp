#pragma once

#include <stdexcept>
#include <string>

namespace polyberg {

/// Input outside the mathematical domain of an operation (bad exponent,
/// point outside the polygon, degenerate vertex, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative or adaptive numerical method stopped before reaching its
/// tolerance. Carries the best residual that was achieved.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A configured size cap was exceeded.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// A configuration document is malformed or references something missing.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace polyberg
